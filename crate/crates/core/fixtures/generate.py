"""Regenerates the bundled LIBSVM fixtures (deterministic)."""
import numpy as np

rng = np.random.default_rng(20220101)


def fmt(v):
    return repr(float(np.round(v, 6)))


def write(path, labels, rows):
    with open(path, "w") as f:
        for y, row in zip(labels, rows):
            feats = " ".join(f"{j}:{fmt(v)}" for j, v in row)
            f.write(f"{y} {feats}".rstrip() + "\n")


# Two overlapping Gaussian classes at +mu / -mu, dense, labels {1, 2}.
n, d = 400, 8
mu = rng.normal(size=d)
mu *= 0.9 / np.linalg.norm(mu)
y = rng.integers(0, 2, size=n)
x = rng.normal(scale=1.0, size=(n, d)) * 0.6 + np.where(y[:, None] == 1, mu, -mu)
x = np.clip(x / np.abs(x).max(), -1, 1)
write("two_blobs.libsvm", [1 if c == 1 else 2 for c in y],
      [[(j + 1, v) for j, v in enumerate(r)] for r in x])

# Sparse planted linear model with 8% label noise, labels {0, 1}.
n, d = 600, 40
w = rng.normal(size=d)
labels, rows = [], []
for _ in range(n):
    idx = np.sort(rng.choice(d, size=rng.integers(3, 9), replace=False))
    vals = rng.uniform(0.05, 1.0, size=idx.size) * rng.choice([-1, 1], size=idx.size)
    margin = vals @ w[idx]
    label = int(margin > 0)
    if rng.random() < 0.08:
        label = 1 - label
    labels.append(label)
    rows.append([(int(j) + 1, v) for j, v in zip(idx, vals)])
write("sparse_planted.libsvm", labels, rows)

# Small three-class file for label normalization.
counts = {1: 8, 2: 13, 3: 9}
labels = [c for c, k in counts.items() for _ in range(k)]
rng.shuffle(labels)
rows = [[(1, float(rng.uniform(-1, 1))), (3, float(rng.uniform(-1, 1)))] for _ in labels]
write("three_class.libsvm", labels, rows)
