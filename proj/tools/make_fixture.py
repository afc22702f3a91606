#!/usr/bin/env python3
"""Writes the bundled digit fixture as MNIST-format IDX files.

Source images are the 8x8 handwritten digits shipped with scikit-learn,
upscaled bilinearly to 28x28 and padded like MNIST (digit in the central
20x20 box).
"""
import argparse
import pathlib
import struct

import numpy as np
from PIL import Image
from sklearn.datasets import load_digits


def to_mnist(img8):
    scaled = (img8 / 16.0 * 255.0).clip(0, 255).astype(np.uint8)
    box = Image.fromarray(scaled).resize((20, 20), Image.BILINEAR)
    out = np.zeros((28, 28), dtype=np.uint8)
    out[4:24, 4:24] = np.asarray(box)
    return out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default=str(pathlib.Path(__file__).resolve().parent.parent / "data" / "fixture"))
    args = ap.parse_args()
    digits = load_digits()
    images = np.stack([to_mnist(im) for im in digits.images])
    labels = digits.target.astype(np.uint8)

    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "images-idx3-ubyte", "wb") as f:
        f.write(struct.pack(">IIII", 0x803, len(images), 28, 28))
        f.write(images.tobytes())
    with open(out / "labels-idx1-ubyte", "wb") as f:
        f.write(struct.pack(">II", 0x801, len(labels)))
        f.write(labels.tobytes())
    print(f"wrote {len(images)} images to {out}")


if __name__ == "__main__":
    main()
