"""Command-line front end.

Exit codes: 0 success, 1 internal failure, 2 usage error, 3 input parse error.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from typing import Optional, Sequence

from boxcrit.boxcore import CriterionKind, CriterionSpec, DomainError, ShiftMode
from boxcrit.dataio import (
    DataFormatError,
    load_detections,
    load_ground_truth,
    read_report,
    write_curves,
    write_detections,
    write_pdf_grid,
    write_report,
)
from boxcrit.distlab.sampling import (
    DEFAULT_OMEGAS,
    PerturbationModel,
    SizeMode,
    expectation_curve,
    parse_omegas,
)
from boxcrit.distlab.theory import THEORY_KINDS, theoretical_moments
from boxcrit.evalkit import APStyle, EvalConfig, EvalReport, evaluate, nms, parse_thresholds, rmap

EXIT_OK, EXIT_INTERNAL, EXIT_USAGE, EXIT_PARSE = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def _add_criterion_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--criterion", default="iou", choices=[k.value for k in CriterionKind],
                   help="similarity criterion (default: iou)")
    p.add_argument("--gamma", type=float, default=0.5, help="SIoU/GSIoU gamma, <= 1 (default: 0.5)")
    p.add_argument("--kappa", type=float, default=64.0, help="SIoU/GSIoU kappa, > 0 (default: 64)")
    p.add_argument("--alpha", type=float, default=3.0, help="alpha-IoU exponent, > 0 (default: 3)")
    p.add_argument("--nwd-c", type=float, default=32.0, help="NWD normalization constant, > 0 (default: 32)")


def _add_threads(p: argparse.ArgumentParser) -> None:
    p.add_argument("--threads", type=_positive_int, default=os.cpu_count() or 1,
                   help="worker threads (default: machine parallelism)")


def _criterion(args) -> CriterionSpec:
    try:
        return CriterionSpec(args.criterion, gamma=args.gamma, kappa=args.kappa,
                             alpha=args.alpha, nwd_constant=args.nwd_c)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="boxcrit", description="Box similarity criteria: detection evaluation, NMS and distribution analysis."
    )
    sub = parser.add_subparsers(dest="command", required=True)

    ev = sub.add_parser("evaluate", help="AP/mAP/AR of detections against ground truth")
    ev.add_argument("--gt", required=True, help="COCO-style ground-truth JSON")
    ev.add_argument("--dets", required=True, help="COCO-style detection results JSON")
    _add_criterion_flags(ev)
    ev.add_argument("--thresholds", default="0.5", help='"0.5" or a range "0.5:0.95" (step 0.05)')
    ev.add_argument("--ap-style", default="auc", choices=[s.value for s in APStyle])
    ev.add_argument("--size-breakdown", action="store_true", help="also report mAP per size bucket")
    ev.add_argument("--max-dets", type=_positive_int, default=None,
                    help="keep at most this many detections per image and class")
    ev.add_argument("--out", help="write the report here")
    ev.add_argument("--format", default="json", choices=["json", "csv"])
    _add_threads(ev)

    an = sub.add_parser("analyze", help="criterion distribution under random box shifts")
    _add_criterion_flags(an)
    an.add_argument("--sigma0", type=float, default=16.0, help="base inaccuracy in pixels (default: 16)")
    an.add_argument("--lambda", dest="lam", type=float, default=0.0,
                    help="inaccuracy slope, sigma = sigma0 + lambda * omega (default: 0)")
    an.add_argument("--omegas", default=",".join(f"{w:g}" for w in DEFAULT_OMEGAS),
                    help="comma-separated box widths")
    an.add_argument("--samples", type=int, default=100_000, help="Monte-Carlo samples per width")
    an.add_argument("--seed", type=int, default=0)
    an.add_argument("--shift", default="horizontal", choices=[m.value for m in ShiftMode])
    an.add_argument("--size-mode", default="same", choices=[m.value for m in SizeMode])
    an.add_argument("--ratio", type=float, default=1.0, help="prediction/ground-truth width ratio")
    an.add_argument("--theory", action="store_true", help="add quadrature moments and z-scores")
    an.add_argument("--out", required=True, help="CSV of expectation and std curves")
    an.add_argument("--pdf-out", help="optional CSV of KDE density grids")
    _add_threads(an)

    nm = sub.add_parser("nms", help="class-wise non-maximum suppression")
    nm.add_argument("--dets", required=True)
    _add_criterion_flags(nm)
    nm.add_argument("--threshold", type=float, required=True)
    nm.add_argument("--out", required=True)
    _add_threads(nm)

    cp = sub.add_parser("compare", help="RmAP of a method report against a baseline report")
    cp.add_argument("--method", required=True)
    cp.add_argument("--baseline", required=True)
    _add_threads(cp)
    return parser


def _criterion_label(spec: CriterionSpec) -> str:
    params = ", ".join(f"{k}={v:g}" for k, v in spec.params().items())
    return f"{spec.kind.value} ({params})" if params else spec.kind.value


def format_report(report: EvalReport, label: str) -> str:
    t = report.thresholds
    sched = f"{t[0]:g}" if len(t) == 1 else f"{t[0]:g}:{t[-1]:g} ({len(t)} thresholds)"
    lines = [f"criterion: {label}", f"thresholds: {sched}", f"ap style: {report.ap_style}", ""]
    lines.append(f"{'class':<12}{'AP':>10}{'TP':>8}{'FP':>8}{'FN':>8}   (counts at {t[0]:.2f})")
    for c, ap in zip(report.classes, report.class_map().values()):
        lines.append(f"{str(c.class_id):<12}{ap:>10.4f}{c.tp[0]:>8}{c.fp[0]:>8}{c.fn[0]:>8}")
    lines.append("")
    for threshold, value in zip(t, report.map_per_threshold):
        lines.append(f"mAP@{threshold:.2f}{'':<4}{value:.4f}")
    if len(t) > 1:
        lines.append(f"mAP@{t[0]:.2f}:{t[-1]:.2f} {report.map:.4f}")
    lines.append(f"AR{'':<10}{report.ar:.4f}")
    if report.size_map:
        lines.append("")
        for bucket, value in report.size_map_mean().items():
            lines.append(f"mAP[{bucket}]{'':<{max(1, 7 - len(bucket))}}{value:.4f}")
    missing = report.classes_without_gt()
    if missing:
        lines.append("")
        lines.append("classes without ground truth (AP 0): " + ", ".join(str(c) for c in missing))
    return "\n".join(lines)


def cmd_evaluate(args) -> int:
    spec = _criterion(args)
    try:
        thresholds = parse_thresholds(args.thresholds)
        config = EvalConfig(spec, thresholds, args.ap_style, args.size_breakdown, args.max_dets, args.threads)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    dataset = load_ground_truth(args.gt)
    dets = load_detections(args.dets)
    report = evaluate(dets, dataset.annotations, config)
    print(format_report(report, _criterion_label(spec)))
    if args.out:
        write_report(report, args.out, args.format)
    return EXIT_OK


def cmd_analyze(args) -> int:
    spec = _criterion(args)
    if args.samples < 1:
        raise UsageError("--samples must be >= 1")
    try:
        omegas = parse_omegas(args.omegas)
        model = PerturbationModel(args.sigma0, args.lam, args.shift, args.size_mode, args.ratio)
        for w in omegas:
            if not w > 0:
                raise ValueError(f"box widths must be > 0, got {w}")
            model.sigma(w)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    if not omegas:
        raise UsageError("--omegas is empty")
    if args.theory:
        same_horizontal = model.shift_mode is ShiftMode.HORIZONTAL and (
            model.size_mode is SizeMode.SAME or model.ratio == 1.0
        )
        if spec.kind not in THEORY_KINDS or not same_horizontal:
            raise UsageError("--theory needs iou/giou/siou/gsiou with same-size horizontal shifts")

    summaries = expectation_curve(spec, model, omegas, args.samples, args.seed, args.threads,
                                  kde_points=201 if args.pdf_out else 0)
    theory = None
    if args.theory:
        theory = [theoretical_moments(spec.kind, s.omega, model.sigma(s.omega), spec.gamma, spec.kappa)
                  for s in summaries]
    write_curves(summaries, args.out, theory)
    if args.pdf_out:
        write_pdf_grid(summaries, args.pdf_out)
    print(f"{_criterion_label(spec)}: {len(summaries)} widths x {args.samples} samples, "
          f"seed {args.seed}, {args.threads} worker(s)")
    for i, s in enumerate(summaries):
        extra = ""
        if theory is not None:
            z = (s.mean - theory[i].mean) / s.std_error if s.std_error > 0 else math.nan
            extra = f"  theory {theory[i].mean:.6f}  z {z:+.2f}"
        print(f"omega {s.omega:>7g}  sigma {s.sigma:>7g}  mean {s.mean:.6f}  std {s.std:.6f}{extra}")
    return EXIT_OK


def cmd_nms(args) -> int:
    spec = _criterion(args)
    if not 0.0 < args.threshold < 1.0:
        raise UsageError("--threshold must lie in (0, 1)")
    dets = load_detections(args.dets)
    kept = nms(dets, spec, args.threshold)
    write_detections(kept, args.out)
    print(f"kept {len(kept)} of {len(dets)} detections")
    return EXIT_OK


def _pct(value: Optional[float]) -> str:
    return "n/a" if value is None else f"{100.0 * value:+.2f}%"


def _safe_rmap(method: float, baseline: float) -> Optional[float]:
    try:
        return rmap(method, baseline)
    except DomainError:
        return None


def cmd_compare(args) -> int:
    method = read_report(args.method)
    baseline = read_report(args.baseline)
    m_cls, b_cls = method.class_map(), baseline.class_map()
    print(f"{'class':<12}{'method':>10}{'baseline':>10}{'RmAP':>10}")
    for cid in b_cls:
        if cid in m_cls:
            print(f"{str(cid):<12}{m_cls[cid]:>10.4f}{b_cls[cid]:>10.4f}{_pct(_safe_rmap(m_cls[cid], b_cls[cid])):>10}")
    print(f"{'overall':<12}{method.map:>10.4f}{baseline.map:>10.4f}{_pct(_safe_rmap(method.map, baseline.map)):>10}")
    return EXIT_OK


COMMANDS = {"evaluate": cmd_evaluate, "analyze": cmd_analyze, "nms": cmd_nms, "compare": cmd_compare}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"boxcrit {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataFormatError, FileNotFoundError, IsADirectoryError) as exc:
        print(f"boxcrit {args.command}: input error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except Exception as exc:  # noqa: BLE001
        print(f"boxcrit {args.command}: internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
