"""Scaled-down versions of the three trend experiments (a minute or two total).

The full protocols live behind the CLI (sweep-width, sweep-lambda,
lip-gap); these use fewer trials/epochs so the shapes show up quickly.
"""

from nodebound.experiments import classification_data, lip_gap_run, sweep_lambda, sweep_width
from nodebound.training import TrainConfig

# 1. wider dynamics -> worse test error on the sine-target task
res = sweep_width([50, 150, 400], trials=2,
                  base_config=TrainConfig(epochs=60, lr=0.01, solver_steps=2),
                  base_seed=0, threads=1)
print("width sweep (test mse means):")
for width in sorted(res.summaries):
    print(f"  width {int(width):>3}: {res.summaries[width]['mean']:.5f}")
print(f"  spearman(width, mean test error) = {res.correlation:+.3f}")

# 2. stronger spectral penalty -> smaller generalization gap on y = 2x
res = sweep_lambda([0.0, 1.0], trials=6,
                   base_config=TrainConfig(epochs=50, lr=0.01, solver_steps=8),
                   base_seed=0, threads=1)
print("\npenalty sweep (gap quartiles):")
for lam in sorted(res.summaries):
    s = res.summaries[lam]
    print(f"  lambda {lam}: mean {s['mean']:+.5f}  [q1 {s['q1']:+.5f}, q3 {s['q3']:+.5f}]")

# 3. the dynamics Lipschitz constant and the accuracy gap rise together
train_set, test_set = classification_data(train_n=800, test_n=400, seed=0)
res = lip_gap_run(train_set, test_set,
                  TrainConfig(epochs=8, lr=0.001, batch_size=128,
                              loss_kind="cross_entropy", solver_steps=8),
                  base_seed=0, state_dim=32, hidden=256, init_scale=2.0)
print(f"\nlipschitz-vs-gap run on {train_set.provenance}:")
for epoch, (lip, gap) in enumerate(zip(res.lipschitz, res.error_gap), start=1):
    print(f"  epoch {epoch}: lipschitz {lip:.3f}  error gap {gap:+.4f}")
print(f"  spearman(lipschitz, gap) = {res.correlation:+.3f}")
