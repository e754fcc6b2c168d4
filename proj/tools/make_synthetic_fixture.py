#!/usr/bin/env python3
"""Writes the seeded synthetic fixtures used by the CLI tests.

Three Gaussian classes in 8 dimensions (class c centered at 4 * e_c, unit
variance), split into train and test, plus a small grouped file for `pool`.
Re-running with the same seed reproduces the committed files byte for byte.
"""

import argparse
import pathlib
import struct

import numpy as np


def write_dn2e(path: pathlib.Path, rows: np.ndarray) -> None:
    rows = np.ascontiguousarray(rows, dtype="<f4")
    count, dim = rows.shape
    header = b"DN2E" + struct.pack("<IIQB3x", 1, dim, count, 0)
    assert len(header) == 24
    path.write_bytes(header + rows.tobytes())


def write_ints(path: pathlib.Path, values) -> None:
    path.write_text("".join(f"{int(v)}\n" for v in values))


def blobs(rng, classes, dim, per_class, offset):
    data, labels = [], []
    for c in range(classes):
        center = np.zeros(dim)
        center[c] = offset
        data.append(center + rng.standard_normal((per_class, dim)))
        labels += [c] * per_class
    return np.vstack(data), np.array(labels)


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", type=pathlib.Path, required=True)
    parser.add_argument("--seed", type=int, default=20190828)
    args = parser.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)

    rng = np.random.default_rng(args.seed)
    train, train_labels = blobs(rng, 3, 8, 60, 4.0)
    test, test_labels = blobs(rng, 3, 8, 30, 4.0)
    write_dn2e(args.out / "train.dn2e", train)
    write_ints(args.out / "train.labels", train_labels)
    write_dn2e(args.out / "test.dn2e", test)
    write_ints(args.out / "test.labels", test_labels)

    # 12 groups of 5 rows with interleaved membership.
    pool = rng.standard_normal((60, 8))
    write_dn2e(args.out / "pool.dn2e", pool)
    write_ints(args.out / "pool.groups", [i % 12 for i in range(60)])


if __name__ == "__main__":
    main()
