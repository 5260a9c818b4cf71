"""Training CLI: python -m modelservice.train {qg|saqa} --data X --out DIR --seed N."""

from __future__ import annotations

import argparse
import logging
import sys

from .data import load_lexicon, load_records, prepare_qg_dataset, prepare_saqa_dataset
from .models import save_qg, save_saqa
from .training import TrainSettings, train_qg, train_saqa


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="python -m modelservice.train")
    parser.add_argument("task", choices=["qg", "saqa"])
    parser.add_argument("--data", required=True, help="JSONL of QA records")
    parser.add_argument("--out", required=True, help="checkpoint directory")
    parser.add_argument("--seed", required=True, type=int)
    parser.add_argument("--lexicon", default=None,
                        help="neighbor lexicon for saqa guidance (word<TAB>n1...)")
    parser.add_argument("--epochs", type=int, default=TrainSettings.epochs)
    parser.add_argument("--batch-size", type=int, default=TrainSettings.batch_size)
    parser.add_argument("--lr", type=float, default=TrainSettings.learning_rate)
    parser.add_argument("--d-model", type=int, default=TrainSettings.d_model)
    parser.add_argument("--layers", type=int, default=TrainSettings.num_layers)
    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    args = build_parser().parse_args(argv)
    settings = TrainSettings(
        epochs=args.epochs,
        batch_size=args.batch_size,
        learning_rate=args.lr,
        seed=args.seed,
        d_model=args.d_model,
        num_layers=args.layers,
    )
    records = load_records(args.data)
    if args.task == "qg":
        result = train_qg(prepare_qg_dataset(records), settings)
        save_qg(args.out, result.model, result.vocab)
    else:
        lexicon = load_lexicon(args.lexicon) if args.lexicon else None
        examples = prepare_saqa_dataset(records, lexicon, args.seed)
        result = train_saqa(examples, settings)
        save_saqa(args.out, result.model, result.vocab)
    print(f"{args.task}: {len(records)} records, "
          f"final loss {result.epoch_losses[-1]:.4f} -> {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
