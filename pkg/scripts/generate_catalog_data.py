"""Regenerate the fixed coefficients of the FINITEMAX and NNL1 catalog problems.

The output is the source of ``src/zosub/_catalog_data.py``; the library never
calls this at import time, it only reads the checked-in constants.

    python scripts/generate_catalog_data.py > src/zosub/_catalog_data.py
"""
import numpy as np

SEED = 20251014


def finitemax_coefficients(rng, n_pieces=3, dim=2):
    linear = rng.normal(size=(n_pieces, dim))
    quad = []
    for i in range(n_pieces):
        # piece 0 and 2 get one negative eigenvalue so the max is nonconvex
        eig = np.abs(rng.normal(size=dim)) + 0.2
        if i % 2 == 0:
            eig[0] = -eig[0]
        basis, _ = np.linalg.qr(rng.normal(size=(dim, dim)))
        quad.append(basis @ np.diag(eig) @ basis.T)
    return linear, np.array(quad)


def nnl1_data(rng, n_samples=20, n_inputs=3, n_hidden=4):
    inputs = rng.normal(size=(n_samples, n_inputs))
    teacher_a = rng.normal(size=n_hidden)
    teacher_w = 0.7 * rng.normal(size=(n_hidden, n_inputs))
    targets = np.tanh(inputs @ teacher_w.T) @ teacher_a + 0.1 * rng.normal(size=n_samples)
    return inputs, targets


def _fmt(arr):
    return repr(np.round(arr, 12).tolist())


def main():
    rng = np.random.default_rng(SEED)
    linear, quad = finitemax_coefficients(rng)
    inputs, targets = nnl1_data(rng)
    print(f'"""Fixed catalog coefficients, generated by scripts/generate_catalog_data.py (seed {SEED})."""')
    print()
    print(f"FINITEMAX_LINEAR = {_fmt(linear)}")
    print(f"FINITEMAX_QUADRATIC = {_fmt(quad)}")
    print(f"NNL1_INPUTS = {_fmt(inputs)}")
    print(f"NNL1_TARGETS = {_fmt(targets)}")


if __name__ == "__main__":
    main()
