"""Command-line front end: generate, label, recover, verify, plot.

Exit codes are a stable contract:
    0  success (for verify: all slices equivalent)
    1  verify found non-equivalent slices
    2  input or schema error (malformed JSON, bad config, bad file)
    3  labelling failure (sequence break, insufficient data)
    4  recovery failure (underdetermined fit, rotation pole)

File formats are documented in :mod:`latkit.jsonio` and the README.
"""
from __future__ import annotations

import argparse
import sys

from . import jsonio
from .errors import (
    DegenerateSliceError,
    InsufficientDataError,
    LatKitError,
    PoleError,
    SchemaError,
    SequenceBreakError,
    StructuralMismatchError,
    UnderdeterminedFitError,
    ValidationError,
)
from .labelling import LabellingConfig, SequenceConfig, label_sequence
from .model import (
    LinearLabelling,
    apply_witness,
    labelling_equivalent,
    restrict_to_points,
)
from .recovery import fit_chart
from .svg import render_slice
from .synth import generate

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_SCHEMA = 2
EXIT_LABELLING = 3
EXIT_RECOVERY = 4


def _parse_point(text: str, flag: str) -> tuple[float, float]:
    try:
        x, y = text.split(",")
        return float(x), float(y)
    except ValueError:
        raise SchemaError(f"{flag} expects X,Y with numeric coordinates, got {text!r}",
                          where=flag) from None


def cmd_generate(args) -> int:
    config = jsonio.read_file(args.config)
    chart, region, hbars, noise = jsonio.parse_generate_config(config)
    if args.seed is not None:
        noise = type(noise)(order=noise.order, amplitude=noise.amplitude, seed=args.seed)
    lattice, truth = generate(chart, region, hbars, noise)
    jsonio.write_file(args.out, jsonio.lattice_to_dict(lattice))
    truth_out = args.truth_out or (str(args.out) + ".truth.json")
    jsonio.write_file(truth_out, jsonio.truth_to_dict(lattice, truth))
    for s, t in zip(lattice.samples, truth.slices):
        print(f"hbar={s.hbar:g}: {len(s)} points ({len(t.dropped_labels)} dropped)")
    print(f"wrote {args.out} and {truth_out}")
    return EXIT_OK


def cmd_label(args) -> int:
    lattice = jsonio.lattice_from_dict(jsonio.read_file(args.lattice))
    cfg = LabellingConfig(
        anchor=_parse_point(args.anchor, "--anchor") if args.anchor else None,
        neighbor_index=args.index,
    )
    scfg = SequenceConfig(density_ratio=args.density_ratio)
    labelling = label_sequence(lattice, cfg, scfg)
    jsonio.write_file(args.out, jsonio.labelling_to_dict(labelling))
    for m, w in zip(labelling.maps, labelling.corrections):
        print(f"hbar={m.hbar:g}: {len(m)} labels; correction M={list(w.m)} t={list(w.t)}")
    for note in labelling.warnings:
        print(f"warning: {note}", file=sys.stderr)
    print(f"wrote {args.out}")
    return EXIT_OK


def cmd_recover(args) -> int:
    lattice = jsonio.lattice_from_dict(jsonio.read_file(args.lattice))
    labelling = jsonio.labelling_from_dict(jsonio.read_file(args.labelling))
    rotation_at = [_parse_point(p, "--rotation-at") for p in args.rotation_at] or None
    report = fit_chart(labelling, lattice, degree=args.degree,
                       jet_order=args.jet_order, rotation_at=rotation_at)
    jsonio.write_file(args.out, jsonio.report_to_dict(report))
    for r in report.residuals:
        print(f"hbar={r.hbar:g}: residual max={r.max:.3e} rms={r.rms:.3e}")
    for e in report.rotation:
        if e.pole:
            print(f"rotation at {e.point}: pole (diverges in this convention)")
        else:
            print(f"rotation at {e.point}: {e.value:.6g} +- {e.confidence:.2g}")
    for note in report.warnings:
        print(f"warning: {note}", file=sys.stderr)
    print(f"wrote {args.out}")
    return EXIT_OK


def cmd_verify(args) -> int:
    labelling = jsonio.labelling_from_dict(jsonio.read_file(args.labelling))
    truth_lab = jsonio.labelling_from_dict(jsonio.read_file(args.truth), "truth")
    if labelling.hbars != truth_lab.hbars:
        raise SchemaError(
            f"hbar sequences differ: {labelling.hbars} vs {truth_lab.hbars}",
            where="verify",
        )
    all_ok = True
    aligned_maps = []
    for m, ref in zip(labelling.maps, truth_lab.maps):
        ref_sub = restrict_to_points(ref, m.points, args.tol)
        res = labelling_equivalent(m, ref_sub, tol=args.tol)
        if res.equivalent:
            w = res.witness
            extra = f" (covers {len(m)}/{len(ref)} points)" if len(ref) != len(m) else ""
            print(f"hbar={m.hbar:g}: EQUIVALENT witness M={list(w.m)} t={list(w.t)}{extra}")
            aligned_maps.append(apply_witness(m, w))
        else:
            note = " (reflected match exists)" if res.reflected else ""
            print(f"hbar={m.hbar:g}: NOT EQUIVALENT{note}")
            all_ok = False
            aligned_maps.append(m)
    if args.aligned_out and all_ok:
        jsonio.write_file(args.aligned_out,
                          jsonio.labelling_to_dict(LinearLabelling(tuple(aligned_maps))))
        print(f"wrote {args.aligned_out}")
    return EXIT_OK if all_ok else EXIT_VERIFY_FAILED


def cmd_plot(args) -> int:
    lattice = jsonio.lattice_from_dict(jsonio.read_file(args.lattice))
    if not (0 <= args.slice < len(lattice.samples)):
        raise SchemaError(
            f"slice index {args.slice} out of range for {len(lattice.samples)} slices",
            where="--slice",
        )
    sample = lattice.samples[args.slice]
    label_map = None
    if args.labelling:
        labelling = jsonio.labelling_from_dict(jsonio.read_file(args.labelling))
        matches = [m for m in labelling.maps if m.hbar == sample.hbar]
        if not matches:
            raise SchemaError(
                f"labelling has no slice at hbar={sample.hbar}", where="--labelling"
            )
        label_map = matches[0]
    text = render_slice(sample, lattice.region, label_map)
    with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    print(f"wrote {args.out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="latkit",
        description="Asymptotic lattice toolkit: generate, label, recover, verify, plot.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="synthesize a lattice from a chart config")
    p.add_argument("--config", required=True, help="generation config JSON")
    p.add_argument("--out", required=True, help="lattice output path")
    p.add_argument("--truth-out", default=None, help="ground-truth output path")
    p.add_argument("--seed", type=int, default=None, help="override the noise seed")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("label", help="label every slice of a lattice file")
    p.add_argument("lattice", help="lattice JSON")
    p.add_argument("--out", required=True, help="labelling output path")
    p.add_argument("--anchor", default=None, help="walk anchor as X,Y")
    p.add_argument("--density-ratio", type=float, default=0.5)
    p.add_argument("--index", choices=("grid_bucket", "kd"), default="grid_bucket")
    p.set_defaults(func=cmd_label)

    p = sub.add_parser("recover", help="fit the chart jet to a labelled lattice")
    p.add_argument("lattice", help="lattice JSON")
    p.add_argument("labelling", help="labelling JSON (ground-truth files accepted)")
    p.add_argument("--out", required=True, help="report output path")
    p.add_argument("--degree", type=int, default=1)
    p.add_argument("--jet-order", type=int, default=0)
    p.add_argument("--rotation-at", action="append", default=[],
                   help="action point X,Y for a rotation estimate (repeatable)")
    p.set_defaults(func=cmd_recover)

    p = sub.add_parser("verify", help="compare a labelling against ground truth")
    p.add_argument("labelling", help="labelling JSON")
    p.add_argument("truth", help="ground-truth JSON")
    p.add_argument("--tol", type=float, default=1e-9, help="point-matching tolerance")
    p.add_argument("--aligned-out", default=None,
                   help="write the labelling aligned to the truth convention")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("plot", help="render a slice (optionally labelled) to SVG")
    p.add_argument("lattice", help="lattice JSON")
    p.add_argument("--labelling", default=None, help="labelling JSON")
    p.add_argument("--out", required=True, help="SVG output path")
    p.add_argument("--slice", type=int, default=0, help="slice index to draw")
    p.set_defaults(func=cmd_plot)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (SchemaError, ValidationError, DegenerateSliceError,
            StructuralMismatchError, FileNotFoundError, IsADirectoryError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_SCHEMA
    except (SequenceBreakError, InsufficientDataError) as e:
        print(f"labelling error: {e}", file=sys.stderr)
        return EXIT_LABELLING
    except (UnderdeterminedFitError, PoleError) as e:
        print(f"recovery error: {e}", file=sys.stderr)
        return EXIT_RECOVERY
    except LatKitError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_SCHEMA


if __name__ == "__main__":
    sys.exit(main())
