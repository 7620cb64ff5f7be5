"""COCO-style JSON ingestion and JSON/CSV emission of reports and curves."""

from __future__ import annotations

import csv
import json
import math
import os
import warnings
from dataclasses import dataclass, field
from typing import Any, Hashable, Iterable, Optional, Sequence, Union

from boxcrit.boxcore import BoundingBox
from boxcrit.distlab.sampling import DistributionSummary
from boxcrit.distlab.theory import Moments
from boxcrit.evalkit.types import ClassResult, Detection, EvalReport, GroundTruthObject

PathLike = Union[str, os.PathLike]

REPORT_CSV_HEADER = ["class_id", "bucket", "threshold", "ap", "tp", "fp", "fn"]
CURVE_CSV_HEADER = ["criterion", "omega", "sigma0", "lambda", "gamma", "kappa", "n", "mean", "std", "std_error"]
THEORY_CSV_COLUMNS = ["theory_mean", "theory_std", "z_score"]
PDF_CSV_HEADER = ["criterion", "omega", "z", "density"]


class DataFormatError(ValueError):
    """Malformed input file; ``json_path`` locates the offending element."""

    def __init__(self, path: PathLike, json_path: str, message: str):
        self.path = str(path)
        self.json_path = json_path
        super().__init__(f"{self.path}: {json_path}: {message}")


@dataclass(frozen=True)
class ImageInfo:
    image_id: Hashable
    width: Optional[float] = None
    height: Optional[float] = None


@dataclass(frozen=True)
class Category:
    class_id: Hashable
    name: str = ""


@dataclass
class Dataset:
    images: list[ImageInfo]
    categories: list[Category]
    annotations: list[GroundTruthObject]
    annotation_ids: list[Any] = field(default_factory=list)

    def counts(self) -> tuple[int, int, int]:
        return len(self.images), len(self.categories), len(self.annotations)


def fmt_float(value: float) -> str:
    """Six significant digits, the serialization precision of every output."""
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return ""
    return f"{value:.6g}"


def round6(value: float) -> float:
    return float(f"{value:.6g}")


# ---------------------------------------------------------------------------
# Loading
# ---------------------------------------------------------------------------


def _read_json(path: PathLike) -> Any:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise DataFormatError(path, "$", f"invalid JSON ({exc.msg} at line {exc.lineno})") from exc


def _number(path, where: str, value: Any) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise DataFormatError(path, where, f"expected a finite number, got {value!r}")
    return float(value)


def _bbox(path, where: str, raw: Any) -> BoundingBox:
    if not isinstance(raw, list) or len(raw) != 4:
        raise DataFormatError(path, where, f"bbox must be [x, y, width, height], got {raw!r}")
    x, y, w, h = (_number(path, f"{where}[{i}]", v) for i, v in enumerate(raw))
    if w <= 0 or h <= 0:
        raise DataFormatError(path, where, f"bbox width and height must be positive, got {raw!r}")
    return BoundingBox(x, y, w, h)


def _require(path, where: str, obj: Any, key: str) -> Any:
    if not isinstance(obj, dict):
        raise DataFormatError(path, where, "expected an object")
    if key not in obj:
        raise DataFormatError(path, where, f"missing key {key!r}")
    return obj[key]


def _clamp_to_image(box: BoundingBox, image: ImageInfo, path, where: str) -> BoundingBox:
    if image.width is None or image.height is None:
        return box
    x1, y1 = max(box.x, 0.0), max(box.y, 0.0)
    x2, y2 = min(box.x + box.w, image.width), min(box.y + box.h, image.height)
    if (x1, y1, x2, y2) == (box.x, box.y, box.x + box.w, box.y + box.h):
        return box
    if x2 <= x1 or y2 <= y1:
        raise DataFormatError(path, where, "bbox lies entirely outside its image")
    warnings.warn(f"{path}: {where}: bbox clamped to image bounds", stacklevel=3)
    return BoundingBox.from_xyxy(x1, y1, x2, y2)


def load_ground_truth(path: PathLike) -> Dataset:
    """Load and validate a COCO-style ground-truth file."""
    data = _read_json(path)
    if not isinstance(data, dict):
        raise DataFormatError(path, "$", "top level must be an object")
    raw_images = _require(path, "$", data, "images")
    raw_anns = _require(path, "$", data, "annotations")
    raw_cats = _require(path, "$", data, "categories")
    for key, value in (("images", raw_images), ("annotations", raw_anns), ("categories", raw_cats)):
        if not isinstance(value, list):
            raise DataFormatError(path, f"$.{key}", "expected an array")

    images: dict[Hashable, ImageInfo] = {}
    for i, img in enumerate(raw_images):
        where = f"$.images[{i}]"
        image_id = _require(path, where, img, "id")
        width = img.get("width")
        height = img.get("height")
        images[image_id] = ImageInfo(
            image_id,
            None if width is None else _number(path, f"{where}.width", width),
            None if height is None else _number(path, f"{where}.height", height),
        )
    categories: dict[Hashable, Category] = {}
    for i, cat in enumerate(raw_cats):
        where = f"$.categories[{i}]"
        class_id = _require(path, where, cat, "id")
        categories[class_id] = Category(class_id, str(cat.get("name", "")))

    annotations: list[GroundTruthObject] = []
    ann_ids: list[Any] = []
    for i, ann in enumerate(raw_anns):
        where = f"$.annotations[{i}]"
        ann_id = ann.get("id", i) if isinstance(ann, dict) else i
        image_id = _require(path, where, ann, "image_id")
        class_id = _require(path, where, ann, "category_id")
        box = _bbox(path, f"{where}.bbox", _require(path, where, ann, "bbox"))
        if image_id not in images:
            raise DataFormatError(path, f"{where}.image_id", f"annotation {ann_id!r} references unknown image {image_id!r}")
        if class_id not in categories:
            raise DataFormatError(
                path, f"{where}.category_id", f"annotation {ann_id!r} references unknown category {class_id!r}"
            )
        box = _clamp_to_image(box, images[image_id], path, f"{where}.bbox")
        annotations.append(GroundTruthObject(image_id, class_id, box))
        ann_ids.append(ann_id)
    return Dataset(list(images.values()), list(categories.values()), annotations, ann_ids)


def load_detections(path: PathLike) -> list[Detection]:
    """Load a COCO-style results array; out-of-range scores are clamped with a warning."""
    data = _read_json(path)
    if not isinstance(data, list):
        raise DataFormatError(path, "$", "detections file must be a JSON array")
    dets = []
    for i, rec in enumerate(data):
        where = f"$[{i}]"
        image_id = _require(path, where, rec, "image_id")
        class_id = _require(path, where, rec, "category_id")
        box = _bbox(path, f"{where}.bbox", _require(path, where, rec, "bbox"))
        score = _number(path, f"{where}.score", _require(path, where, rec, "score"))
        if not 0.0 <= score <= 1.0:
            clamped = min(max(score, 0.0), 1.0)
            warnings.warn(f"{path}: {where}.score {score} clamped to {clamped}", stacklevel=2)
            score = clamped
        dets.append(Detection(image_id, class_id, box, score))
    return dets


def write_detections(dets: Iterable[Detection], path: PathLike) -> None:
    records = [
        {"image_id": d.image_id, "category_id": d.class_id, "bbox": d.box.as_list(), "score": d.score}
        for d in dets
    ]
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(records, fh, indent=1)
        fh.write("\n")


# ---------------------------------------------------------------------------
# Evaluation reports
# ---------------------------------------------------------------------------


def report_to_dict(report: EvalReport) -> dict:
    return {
        "criterion": {k: (round6(v) if isinstance(v, float) else v) for k, v in report.criterion.items()},
        "ap_style": report.ap_style,
        "thresholds": [round6(t) for t in report.thresholds],
        "map": round6(report.map),
        "map_per_threshold": [round6(v) for v in report.map_per_threshold],
        "ar": round6(report.ar),
        "size_map": {b: [round6(v) for v in vals] for b, vals in report.size_map.items()},
        "classes": [
            {
                "class_id": c.class_id,
                "n_gt": c.n_gt,
                "n_det": c.n_det,
                "ap": [round6(v) for v in c.ap],
                "tp": list(c.tp),
                "fp": list(c.fp),
                "fn": list(c.fn),
            }
            for c in report.classes
        ],
    }


def report_from_dict(data: dict) -> EvalReport:
    classes = [
        ClassResult(
            c["class_id"], int(c["n_gt"]), int(c["n_det"]),
            tuple(float(v) for v in c["ap"]),
            tuple(int(v) for v in c["tp"]),
            tuple(int(v) for v in c["fp"]),
            tuple(int(v) for v in c["fn"]),
        )
        for c in data["classes"]
    ]
    return EvalReport(
        criterion=dict(data.get("criterion", {})),
        thresholds=tuple(float(t) for t in data["thresholds"]),
        ap_style=data.get("ap_style", ""),
        classes=classes,
        map_per_threshold=[float(v) for v in data["map_per_threshold"]],
        ar=float(data.get("ar", math.nan)),
        size_map={b: [float(v) for v in vals] for b, vals in data.get("size_map", {}).items()},
    )


def _report_rows(report: EvalReport) -> list[list[str]]:
    rows = []
    for c in report.classes:
        for k, t in enumerate(report.thresholds):
            rows.append([str(c.class_id), "all", fmt_float(t), fmt_float(c.ap[k]), str(c.tp[k]), str(c.fp[k]), str(c.fn[k])])
    for bucket, values in report.size_map.items():
        for t, v in zip(report.thresholds, values):
            rows.append(["*", bucket, fmt_float(t), fmt_float(v), "", "", ""])
    return rows


def write_report(report: EvalReport, path: PathLike, fmt: str = "json") -> None:
    """Write a report as JSON (complete) or CSV (one row per class x threshold,
    then one row per size bucket x threshold with class ``*``)."""
    fmt = fmt.lower()
    if fmt == "json":
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(report_to_dict(report), fh, indent=2)
            fh.write("\n")
    elif fmt == "csv":
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(REPORT_CSV_HEADER)
            writer.writerows(_report_rows(report))
    else:
        raise ValueError(f"unknown report format {fmt!r}")


def _parse_id(text: str) -> Hashable:
    try:
        return int(text)
    except ValueError:
        return text


def read_report(path: PathLike) -> EvalReport:
    """Read a report written by :func:`write_report`.

    CSV reports carry no AR or criterion metadata; those come back as NaN and
    an empty dict.
    """
    with open(path, encoding="utf-8") as fh:
        head = fh.read(1)
    if head in ("{", "[") or str(path).endswith(".json"):
        data = _read_json(path)
        try:
            return report_from_dict(data)
        except (KeyError, TypeError, ValueError) as exc:
            raise DataFormatError(path, "$", f"not an evaluation report ({exc})") from exc
    with open(path, encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0] != REPORT_CSV_HEADER:
        raise DataFormatError(path, "row 0", f"expected header {','.join(REPORT_CSV_HEADER)}")
    thresholds: list[float] = []
    per_class: dict[Hashable, dict[str, list]] = {}
    size_map: dict[str, list[float]] = {}
    for r, row in enumerate(rows[1:], start=1):
        if len(row) != len(REPORT_CSV_HEADER):
            raise DataFormatError(path, f"row {r}", "wrong number of columns")
        class_id, bucket, t, ap, tp, fp, fn = row
        t = float(t)
        if class_id == "*":
            size_map.setdefault(bucket, []).append(float(ap))
            continue
        if t not in thresholds:
            thresholds.append(t)
        entry = per_class.setdefault(_parse_id(class_id), {"ap": [], "tp": [], "fp": [], "fn": []})
        entry["ap"].append(float(ap))
        entry["tp"].append(int(tp))
        entry["fp"].append(int(fp))
        entry["fn"].append(int(fn))
    classes = [
        ClassResult(cid, e["tp"][0] + e["fn"][0], e["tp"][0] + e["fp"][0],
                    tuple(e["ap"]), tuple(e["tp"]), tuple(e["fp"]), tuple(e["fn"]))
        for cid, e in per_class.items()
    ]
    map_per_threshold = [
        math.fsum(c.ap[k] for c in classes) / len(classes) if classes else 0.0 for k in range(len(thresholds))
    ]
    return EvalReport({}, tuple(thresholds), "", classes, map_per_threshold, math.nan, size_map)


# ---------------------------------------------------------------------------
# Distribution curves
# ---------------------------------------------------------------------------


def curve_row(s: DistributionSummary) -> list[str]:
    return [
        s.criterion,
        fmt_float(s.omega),
        fmt_float(s.sigma0),
        fmt_float(s.lam),
        fmt_float(s.params["gamma"]) if "gamma" in s.params else "",
        fmt_float(s.params["kappa"]) if "kappa" in s.params else "",
        str(s.n_samples),
        fmt_float(s.mean),
        fmt_float(s.std),
        fmt_float(s.std_error),
    ]


def write_curves(
    summaries: Sequence[DistributionSummary],
    path: PathLike,
    theory: Optional[Sequence[Moments]] = None,
) -> None:
    """Expectation/std curves as CSV; ``theory`` appends quadrature columns and
    the Monte-Carlo z-score ``(mean - theory_mean) / std_error``."""
    header = list(CURVE_CSV_HEADER)
    if theory is not None:
        header += THEORY_CSV_COLUMNS
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for i, s in enumerate(summaries):
            row = curve_row(s)
            if theory is not None:
                m = theory[i]
                z = (s.mean - m.mean) / s.std_error if s.std_error > 0 else math.nan
                row += [fmt_float(m.mean), fmt_float(m.std), fmt_float(z)]
            writer.writerow(row)


def write_pdf_grid(summaries: Sequence[DistributionSummary], path: PathLike) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(PDF_CSV_HEADER)
        for s in summaries:
            for z, d in s.pdf_grid:
                writer.writerow([s.criterion, fmt_float(s.omega), fmt_float(z), fmt_float(d)])


def read_curves(path: PathLike) -> list[dict[str, str]]:
    with open(path, encoding="utf-8", newline="") as fh:
        return list(csv.DictReader(fh))
