#!/usr/bin/env python3
"""Convert published split masks into the three-section text split format.

Usage:
    convert_splits.py --name texas --in splits/*.npz --out data/splits/

Each input is an .npz archive with boolean ``train_mask``, ``val_mask`` and
``test_mask`` arrays (the form the published per-split files use); input i
becomes ``<name>_split_<i>.txt`` with ``#train``/``#val``/``#test``
sections, one node index per line.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np


class SplitConversionError(ValueError):
    pass


def convert_split_file(npz_path, out_path) -> None:
    npz_path = Path(npz_path)
    if not npz_path.exists():
        raise SplitConversionError(f"{npz_path}: file not found")
    with np.load(npz_path) as data:
        missing = [k for k in ("train_mask", "val_mask", "test_mask")
                   if k not in data]
        if missing:
            raise SplitConversionError(f"{npz_path}: missing arrays {missing}")
        masks = {k: np.asarray(data[k]).astype(bool).ravel()
                 for k in ("train_mask", "val_mask", "test_mask")}

    lengths = {m.size for m in masks.values()}
    if len(lengths) != 1:
        raise SplitConversionError(f"{npz_path}: mask lengths disagree: {lengths}")
    overlap = (masks["train_mask"] & masks["val_mask"]) \
        | (masks["train_mask"] & masks["test_mask"]) \
        | (masks["val_mask"] & masks["test_mask"])
    if overlap.any():
        raise SplitConversionError(
            f"{npz_path}: masks overlap at nodes {np.flatnonzero(overlap)[:5].tolist()}"
        )
    for key, mask in masks.items():
        if not mask.any():
            raise SplitConversionError(f"{npz_path}: {key} selects no nodes")

    with open(out_path, "w", encoding="utf-8") as fh:
        for section, key in (("train", "train_mask"), ("val", "val_mask"),
                             ("test", "test_mask")):
            fh.write(f"#{section}\n")
            for idx in np.flatnonzero(masks[key]):
                fh.write(f"{idx}\n")


def convert_splits(name: str, npz_paths, out_dir) -> list[Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for i, npz_path in enumerate(npz_paths):
        out_path = out_dir / f"{name}_split_{i}.txt"
        convert_split_file(npz_path, out_path)
        written.append(out_path)
    return written


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--name", required=True)
    parser.add_argument("--in", required=True, nargs="+", dest="npz_paths")
    parser.add_argument("--out", required=True, dest="out_dir")
    args = parser.parse_args(argv)
    try:
        written = convert_splits(args.name, args.npz_paths, args.out_dir)
    except Exception as e:
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return 1
    for path in written:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
