"""Build the MNIST 5-vs-8 test fixture from the 5,000-image MNIST subset
that ships inside the mlxtend wheel (500 training-set images per digit).

    pip download mlxtend==0.24.0 --no-deps -d /tmp/mlx
    python scripts/make_mnist_fixture.py /tmp/mlx/mlxtend-0.24.0-py3-none-any.whl

Writes gzip-compressed IDX files to tests/data/.
"""

import argparse
import gzip
import io
import zipfile
from pathlib import Path

import numpy as np

from vcdd.data import write_idx_images, write_idx_labels

MEMBER = "mlxtend/data/data/mnist_5k.csv.gz"
OUT = Path(__file__).resolve().parent.parent / "tests" / "data"


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("wheel")
    ap.add_argument("--digits", default="5,8")
    args = ap.parse_args()

    with zipfile.ZipFile(args.wheel) as z:
        table = np.loadtxt(io.BytesIO(gzip.decompress(z.read(MEMBER))), delimiter=",")
    table = table.astype(np.uint8)
    pixels, labels = table[:, :-1], table[:, -1]
    keep = np.isin(labels, [int(d) for d in args.digits.split(",")])
    OUT.mkdir(parents=True, exist_ok=True)
    img, lab = OUT / "mnist58-images-idx3-ubyte", OUT / "mnist58-labels-idx1-ubyte"
    write_idx_images(img, pixels[keep].reshape(-1, 28, 28))
    write_idx_labels(lab, labels[keep])
    for p in (img, lab):
        p.with_name(p.name + ".gz").write_bytes(gzip.compress(p.read_bytes(), mtime=0))
        p.unlink()
    print(f"wrote {keep.sum()} images to {OUT}")


if __name__ == "__main__":
    main()
