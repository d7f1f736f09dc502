"""Convert the per-class JSON dumps of the `fashion-mnist` npm package into
gzipped IDX files.

usage: python3 scripts/fashion_json_to_idx.py <package>/src/clothes data/fashion-mnist 0 3
"""

import gzip
import json
import struct
import sys
from pathlib import Path


def main() -> None:
    src, out = Path(sys.argv[1]), Path(sys.argv[2])
    classes = [int(c) for c in sys.argv[3:]] or list(range(10))
    images, labels = bytearray(), bytearray()
    count = 0
    for c in classes:
        rows = json.loads((src / f"{c}.json").read_text())["data"]
        for row in rows:
            if not row:
                # the dumps contain empty separator rows
                continue
            if len(row) != 784 or not all(0 <= p <= 255 for p in row):
                raise SystemExit(f"class {c}: malformed image")
            images.extend(row)
            labels.append(c)
            count += 1
    out.mkdir(parents=True, exist_ok=True)
    tag = "-".join(str(c) for c in classes)
    with gzip.GzipFile(out / f"classes-{tag}-images-idx3-ubyte.gz", "wb", mtime=0) as f:
        f.write(struct.pack(">IIII", 0x803, count, 28, 28) + bytes(images))
    with gzip.GzipFile(out / f"classes-{tag}-labels-idx1-ubyte.gz", "wb", mtime=0) as f:
        f.write(struct.pack(">II", 0x801, count) + bytes(labels))
    print(f"wrote {count} images")


if __name__ == "__main__":
    main()
