"""Command line entry point: export checkpoints, list aliases, re-run self-tests.

Exit codes: 0 success, 1 configuration problem, 2 unsupported or corrupted
export, 3 self-test divergence.
"""

from __future__ import annotations

import argparse
import sys

from .errors import ExportConfigError, ExportError
from .exporter import CHECKPOINTS, MANIFEST_FILE, export, load_export_manifest, self_test
from .pairs import DEFAULT_PAIRS


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ExportConfigError(message)


def build_parser() -> _Parser:
    parser = _Parser(prog="model-export", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("export", help="convert one checkpoint into an export directory")
    p.add_argument("checkpoint", help="registered alias, hub identifier, or local checkpoint directory")
    p.add_argument("--out-dir", required=True, help="directory receiving manifest, model, and tokenizer")
    p.add_argument("--backend-id", default=None,
                   help="backend id recorded in the manifest (default: alias or checkpoint stem)")
    p.add_argument("--revision", default=None, help="exact checkpoint revision to pin")
    p.add_argument("--tolerance", type=float, default=1e-4,
                   help="post-export sanity-pair tolerance")
    p.set_defaults(func=_cmd_export)

    p = sub.add_parser("self-test", help="compare an export against its source checkpoint")
    p.add_argument("export_dir")
    p.add_argument("--checkpoint", default=None, help="override the manifest's source checkpoint")
    p.add_argument("--revision", default=None)
    p.add_argument("--tolerance", type=float, default=1e-3)
    p.add_argument("--batch-size", type=int, default=8)
    p.set_defaults(func=_cmd_self_test)

    p = sub.add_parser("list", help="show registered checkpoint aliases")
    p.set_defaults(func=_cmd_list)
    return parser


def _cmd_export(args) -> int:
    manifest = export(args.checkpoint, args.out_dir, backend_id=args.backend_id,
                      revision=args.revision, tolerance=args.tolerance)
    print(f"exported {manifest.source_checkpoint} (revision {manifest.source_revision}) "
          f"as backend {manifest.backend_id!r} -> {args.out_dir}/{MANIFEST_FILE}")
    print(f"label order: {', '.join(manifest.label_order)}; max tokens: {manifest.max_tokens}; "
          f"inputs: {', '.join(manifest.inputs)}")
    return 0


def _cmd_self_test(args) -> int:
    manifest = load_export_manifest(args.export_dir)
    gap = self_test(args.export_dir, checkpoint=args.checkpoint, revision=args.revision,
                    tolerance=args.tolerance, batch_size=args.batch_size)
    print(f"self-test ok: backend {manifest.backend_id!r}, {len(DEFAULT_PAIRS)} pairs, "
          f"max probability gap {gap:.2e} (tolerance {args.tolerance:.0e})")
    return 0


def _cmd_list(args) -> int:
    for alias, checkpoint in sorted(CHECKPOINTS.items()):
        print(f"{alias}\t{checkpoint}")
    return 0


def main(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except ExportError as e:
        print(f"error: {e}", file=sys.stderr)
        return e.exit_code


if __name__ == "__main__":
    raise SystemExit(main())
