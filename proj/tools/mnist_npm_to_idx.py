#!/usr/bin/env python3
"""Convert the 10,000 MNIST digits bundled with the `mnist` npm package to IDX files.

Usage:
    npm pack mnist && tar xzf mnist-*.tgz
    python3 tools/mnist_npm_to_idx.py package/src/digits data/mnist10k

The npm package stores each digit class as a JSON array of pixel intensities
already divided by 255 (rounded to 3 decimals). They are mapped back to bytes
with round(v * 255) and written in a fixed shuffled order (seed 0) so that
classes are interleaved.
"""
import json
import pathlib
import struct
import sys

import numpy as np


def main() -> int:
    if len(sys.argv) != 3:
        print(__doc__, file=sys.stderr)
        return 2
    src = pathlib.Path(sys.argv[1])
    dst = pathlib.Path(sys.argv[2])
    dst.mkdir(parents=True, exist_ok=True)

    images, labels = [], []
    for digit in range(10):
        raw = np.asarray(json.loads((src / f"{digit}.json").read_text())["data"], dtype=np.float64)
        imgs = raw.reshape(-1, 784)
        images.append(np.clip(np.rint(imgs * 255.0), 0, 255).astype(np.uint8))
        labels.append(np.full(len(imgs), digit, dtype=np.uint8))
    images = np.concatenate(images)
    labels = np.concatenate(labels)
    order = np.random.default_rng(0).permutation(len(labels))
    images, labels = images[order], labels[order]

    with open(dst / "images-idx3-ubyte", "wb") as f:
        f.write(struct.pack(">IIII", 0x00000803, len(images), 28, 28))
        f.write(images.tobytes())
    with open(dst / "labels-idx1-ubyte", "wb") as f:
        f.write(struct.pack(">II", 0x00000801, len(labels)))
        f.write(labels.tobytes())
    print(f"wrote {len(labels)} images to {dst}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
