"""Create the (training-free) embedding checkpoint.

Usage: python -m modelservice.embed_init --out checkpoints/embed --seed 0
"""

from __future__ import annotations

import argparse
import sys

from .models import EmbedConfig, Embedder, save_embedder


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="python -m modelservice.embed_init")
    parser.add_argument("--out", required=True, help="checkpoint directory")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--dim", type=int, default=EmbedConfig.dim)
    parser.add_argument("--buckets", type=int, default=EmbedConfig.buckets)
    args = parser.parse_args(argv)
    embedder = Embedder(EmbedConfig(dim=args.dim, buckets=args.buckets, seed=args.seed))
    save_embedder(args.out, embedder)
    print(f"embed: dim {args.dim}, {args.buckets} buckets -> {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
