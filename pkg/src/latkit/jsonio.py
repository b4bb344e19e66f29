"""Canonical JSON serialization for every domain type.

All files written by the toolkit come through :func:`dumps`, which emits
floats with 17 significant digits (lossless for IEEE-754 doubles) and is
byte-deterministic for equal inputs.  Loaders validate shape and report
the offending field path in :class:`SchemaError`.

File schemas
------------
lattice:    {"region": {"min": [x, y], "max": [x, y], "inner_margin": m},
             "hbar_index": [h, ...],
             "slices": [{"hbar": h, "points": [[x, y], ...]}, ...]}
labelling:  {"slices": [{"hbar": h,
                         "entries": [{"point": [x, y], "k": [k1, k2]}, ...]},
                        ...]}
truth:      lattice keys plus per-slice "labels" parallel to "points",
            "chart", "noise", and per-slice "dropped" records.
chart:      {"domain": {"min": [x, y], "max": [x, y]}, "order": J,
             "degree": d, "terms": [{"gx": [[...]], "gy": [[...]]}, ...]}
report:     chart, residuals, per-point Jacobians, rotation entries, and
            the fit-basis/covariance data needed to re-derive confidences.
"""
from __future__ import annotations

import json
import math

import numpy as np

from .charts import ChartJet
from .errors import SchemaError
from .geometry import Rect, Region
from .model import (
    AsymptoticLattice,
    LabelMap,
    LatticeSample,
    LinearLabelling,
)
from .recovery import FitBasis, RecoveryReport, RotationEntry, SliceResidual
from .synth import GroundTruth, NoiseModel, SliceTruth


# ---------------------------------------------------------------------------
# canonical emitter

def _fmt_float(x: float) -> str:
    if not math.isfinite(x):
        raise ValueError(f"cannot serialize non-finite float {x!r}")
    s = format(float(x), ".17g")
    if not any(c in s for c in ".eE"):
        s += ".0"
    return s


def _emit(obj, out: list[str]) -> None:
    if obj is None:
        out.append("null")
    elif obj is True:
        out.append("true")
    elif obj is False:
        out.append("false")
    elif isinstance(obj, (int, np.integer)):
        out.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        out.append(_fmt_float(float(obj)))
    elif isinstance(obj, str):
        out.append(json.dumps(obj))
    elif isinstance(obj, dict):
        out.append("{")
        for i, (k, v) in enumerate(obj.items()):
            if i:
                out.append(",")
            out.append(json.dumps(str(k)))
            out.append(":")
            _emit(v, out)
        out.append("}")
    elif isinstance(obj, (list, tuple)) or isinstance(obj, np.ndarray):
        seq = obj.tolist() if isinstance(obj, np.ndarray) else obj
        out.append("[")
        for i, v in enumerate(seq):
            if i:
                out.append(",")
            _emit(v, out)
        out.append("]")
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj) -> str:
    out: list[str] = []
    _emit(obj, out)
    return "".join(out)


def write_file(path, obj) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dumps(obj))
        fh.write("\n")


def read_file(path) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise SchemaError(
            f"malformed JSON: {e.msg} at byte offset {e.pos}", where=str(path)
        ) from e


# ---------------------------------------------------------------------------
# schema helpers

def _need(data: dict, key: str, path: str):
    if not isinstance(data, dict) or key not in data:
        raise SchemaError(f"missing required field {key!r}", where=path)
    return data[key]


def _pair(value, path: str) -> tuple[float, float]:
    if not isinstance(value, (list, tuple)) or len(value) != 2:
        raise SchemaError("expected a pair [a, b]", where=path)
    try:
        return float(value[0]), float(value[1])
    except (TypeError, ValueError):
        raise SchemaError("pair entries must be numbers", where=path) from None


def _points_array(value, path: str) -> np.ndarray:
    try:
        arr = np.asarray(value, dtype=float)
    except (TypeError, ValueError):
        raise SchemaError("expected an array of [x, y] pairs", where=path) from None
    if arr.size == 0:
        arr = arr.reshape(0, 2)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise SchemaError("expected an array of [x, y] pairs", where=path)
    return arr


# ---------------------------------------------------------------------------
# region / lattice

def region_to_dict(region: Region) -> dict:
    b = region.bounds
    return {
        "min": [b.xmin, b.ymin],
        "max": [b.xmax, b.ymax],
        "inner_margin": region.inner_margin,
    }


def region_from_dict(data, path: str = "region") -> Region:
    lo = _pair(_need(data, "min", path), f"{path}.min")
    hi = _pair(_need(data, "max", path), f"{path}.max")
    margin = _need(data, "inner_margin", path)
    try:
        return Region(Rect(lo[0], lo[1], hi[0], hi[1]), float(margin))
    except (TypeError, ValueError) as e:
        raise SchemaError(f"invalid region: {e}", where=path) from e


def lattice_to_dict(lattice: AsymptoticLattice) -> dict:
    return {
        "region": region_to_dict(lattice.region),
        "hbar_index": list(lattice.hbar_index),
        "slices": [
            {"hbar": s.hbar, "points": s.points} for s in lattice.samples
        ],
    }


def lattice_from_dict(data, path: str = "lattice") -> AsymptoticLattice:
    region = region_from_dict(_need(data, "region", path), f"{path}.region")
    raw_slices = _need(data, "slices", path)
    if not isinstance(raw_slices, list) or not raw_slices:
        raise SchemaError("slices must be a non-empty list", where=f"{path}.slices")
    samples = []
    for i, s in enumerate(raw_slices):
        sp = f"{path}.slices[{i}]"
        hbar = _need(s, "hbar", sp)
        pts = _points_array(_need(s, "points", sp), f"{sp}.points")
        try:
            samples.append(LatticeSample(float(hbar), pts))
        except (TypeError, ValueError) as e:
            raise SchemaError(f"invalid slice: {e}", where=sp) from e
    hbar_index = tuple(float(h) for h in data.get("hbar_index", ()))
    try:
        return AsymptoticLattice(region, tuple(samples), hbar_index)
    except ValueError as e:
        raise SchemaError(f"invalid lattice: {e}", where=path) from e


# ---------------------------------------------------------------------------
# labelling

def labelling_to_dict(lab: LinearLabelling) -> dict:
    return {
        "slices": [
            {
                "hbar": m.hbar,
                "entries": [
                    {"point": [float(p[0]), float(p[1])], "k": [int(k[0]), int(k[1])]}
                    for p, k in zip(m.points, m.labels)
                ],
            }
            for m in lab.maps
        ]
    }


def _label_map_from_entries(hbar: float, entries, path: str) -> LabelMap:
    pts = np.zeros((len(entries), 2))
    labs = np.zeros((len(entries), 2), dtype=np.int64)
    for i, e in enumerate(entries):
        ep = f"{path}.entries[{i}]"
        px, py = _pair(_need(e, "point", ep), f"{ep}.point")
        k1, k2 = _pair(_need(e, "k", ep), f"{ep}.k")
        pts[i] = (px, py)
        labs[i] = (int(k1), int(k2))
    try:
        return LabelMap(hbar, pts, labs)
    except (TypeError, ValueError) as e:
        raise SchemaError(f"invalid label map: {e}", where=path) from e


def labelling_from_dict(data, path: str = "labelling") -> LinearLabelling:
    """Parse a labelling file; ground-truth files are accepted too."""
    raw_slices = _need(data, "slices", path)
    if not isinstance(raw_slices, list) or not raw_slices:
        raise SchemaError("slices must be a non-empty list", where=f"{path}.slices")
    maps = []
    for i, s in enumerate(raw_slices):
        sp = f"{path}.slices[{i}]"
        hbar = float(_need(s, "hbar", sp))
        if "entries" in s:
            maps.append(_label_map_from_entries(hbar, s["entries"], sp))
        elif "labels" in s:
            pts = _points_array(_need(s, "points", sp), f"{sp}.points")
            labs = _points_array(s["labels"], f"{sp}.labels").astype(np.int64)
            if len(labs) != len(pts):
                raise SchemaError("labels must parallel points", where=sp)
            try:
                maps.append(LabelMap(hbar, pts, labs))
            except (TypeError, ValueError) as e:
                raise SchemaError(f"invalid label map: {e}", where=sp) from e
        else:
            raise SchemaError("slice has neither entries nor labels", where=sp)
    try:
        return LinearLabelling(tuple(maps))
    except (TypeError, ValueError) as e:
        raise SchemaError(f"invalid labelling: {e}", where=path) from e


# ---------------------------------------------------------------------------
# chart

def chart_to_dict(chart: ChartJet) -> dict:
    d = chart.domain
    return {
        "domain": {"min": [d.xmin, d.ymin], "max": [d.xmax, d.ymax]},
        "order": chart.order,
        "degree": chart.coeffs.shape[2] - 1,
        "terms": [
            {"gx": chart.coeffs[i, 0], "gy": chart.coeffs[i, 1]}
            for i in range(chart.order + 1)
        ],
    }


def chart_from_dict(data, path: str = "chart", checked: bool = True) -> ChartJet:
    dom = _need(data, "domain", path)
    lo = _pair(_need(dom, "min", f"{path}.domain"), f"{path}.domain.min")
    hi = _pair(_need(dom, "max", f"{path}.domain"), f"{path}.domain.max")
    terms = _need(data, "terms", path)
    if not isinstance(terms, list) or not terms:
        raise SchemaError("terms must be a non-empty list", where=f"{path}.terms")
    mats = []
    for i, t in enumerate(terms):
        tp = f"{path}.terms[{i}]"
        try:
            gx = np.asarray(_need(t, "gx", tp), dtype=float)
            gy = np.asarray(_need(t, "gy", tp), dtype=float)
        except (TypeError, ValueError):
            raise SchemaError("term matrices must be numeric", where=tp) from None
        if gx.ndim != 2 or gx.shape != gy.shape or gx.shape[0] != gx.shape[1]:
            raise SchemaError("term matrices must be square and congruent", where=tp)
        mats.append(np.stack([gx, gy]))
    coeffs = np.stack(mats)
    try:
        domain = Rect(lo[0], lo[1], hi[0], hi[1])
        return ChartJet(domain, coeffs) if checked else ChartJet.unchecked(domain, coeffs)
    except (TypeError, ValueError) as e:
        raise SchemaError(f"invalid chart: {e}", where=path) from e


# ---------------------------------------------------------------------------
# noise / ground truth

def noise_to_dict(noise: NoiseModel) -> dict:
    return {"order": noise.order, "amplitude": noise.amplitude, "seed": noise.seed}


def noise_from_dict(data, path: str = "noise") -> NoiseModel:
    try:
        return NoiseModel(
            order=int(_need(data, "order", path)),
            amplitude=float(_need(data, "amplitude", path)),
            seed=int(_need(data, "seed", path)),
        )
    except (TypeError, ValueError) as e:
        raise SchemaError(f"invalid noise model: {e}", where=path) from e


def truth_to_dict(lattice: AsymptoticLattice, truth: GroundTruth) -> dict:
    out = lattice_to_dict(lattice)
    for s, t in zip(out["slices"], truth.slices):
        s["labels"] = t.labels
    out["chart"] = chart_to_dict(truth.chart)
    out["noise"] = noise_to_dict(truth.noise)
    out["dropped"] = [
        {"hbar": t.hbar, "labels": t.dropped_labels, "points": t.dropped_points}
        for t in truth.slices
    ]
    return out


def truth_from_dict(data, path: str = "truth") -> tuple[AsymptoticLattice, GroundTruth]:
    lattice = lattice_from_dict(data, path)
    chart = chart_from_dict(_need(data, "chart", path), f"{path}.chart")
    noise = noise_from_dict(_need(data, "noise", path), f"{path}.noise")
    raw_slices = data["slices"]
    raw_dropped = data.get("dropped", [])
    drop_by_hbar = {}
    for i, d in enumerate(raw_dropped):
        dp = f"{path}.dropped[{i}]"
        drop_by_hbar[float(_need(d, "hbar", dp))] = (
            _points_array(d.get("labels", []), f"{dp}.labels").astype(np.int64),
            _points_array(d.get("points", []), f"{dp}.points"),
        )
    truths = []
    for i, (sample, s) in enumerate(zip(lattice.samples, raw_slices)):
        sp = f"{path}.slices[{i}]"
        labs = _points_array(_need(s, "labels", sp), f"{sp}.labels").astype(np.int64)
        if len(labs) != len(sample):
            raise SchemaError("labels must parallel points", where=sp)
        dl, dpnts = drop_by_hbar.get(sample.hbar, (np.zeros((0, 2), np.int64), np.zeros((0, 2))))
        truths.append(SliceTruth(sample.hbar, labs, dl, dpnts))
    return lattice, GroundTruth(chart=chart, noise=noise, slices=tuple(truths))


# ---------------------------------------------------------------------------
# recovery report

def report_to_dict(report: RecoveryReport) -> dict:
    return {
        "chart": chart_to_dict(report.chart),
        "degree": report.degree,
        "jet_order": report.jet_order,
        "residuals": [
            {"hbar": r.hbar, "max": r.max, "rms": r.rms} for r in report.residuals
        ],
        "jacobians": [
            {"hbar": r.hbar, "at": pts, "matrices": jac}
            for r, pts, jac in zip(report.residuals, report.jacobian_points,
                                   report.jacobians)
        ],
        "jacobian_sign_consistent": report.jacobian_sign_consistent,
        "rotation": [
            {"at": list(e.point), "value": e.value, "confidence": e.confidence,
             "pole": e.pole}
            for e in report.rotation
        ],
        "fit_basis": {
            "mid": list(report.basis.mid),
            "half": list(report.basis.half),
            "degree": report.basis.degree,
            "jet_order": report.basis.jet_order,
        },
        "gram_inv": report.gram_inv,
        "sigma2": list(report.sigma2),
        "warnings": list(report.warnings),
    }


def report_from_dict(data, path: str = "report") -> RecoveryReport:
    chart = chart_from_dict(_need(data, "chart", path), f"{path}.chart", checked=False)
    residuals = tuple(
        SliceResidual(float(r["hbar"]), float(r["max"]), float(r["rms"]))
        for r in _need(data, "residuals", path)
    )
    jac_points, jacobians = [], []
    for i, j in enumerate(_need(data, "jacobians", path)):
        jp = f"{path}.jacobians[{i}]"
        jac_points.append(_points_array(_need(j, "at", jp), f"{jp}.at"))
        m = np.asarray(_need(j, "matrices", jp), dtype=float)
        if m.size == 0:
            m = m.reshape(0, 2, 2)
        if m.ndim != 3 or m.shape[1:] != (2, 2):
            raise SchemaError("matrices must be (N, 2, 2)", where=jp)
        jacobians.append(m)
    rotation = tuple(
        RotationEntry(
            point=_pair(_need(e, "at", f"{path}.rotation[{i}]"), f"{path}.rotation[{i}].at"),
            value=None if e.get("value") is None else float(e["value"]),
            confidence=None if e.get("confidence") is None else float(e["confidence"]),
            pole=bool(e.get("pole", False)),
        )
        for i, e in enumerate(_need(data, "rotation", path))
    )
    fb = _need(data, "fit_basis", path)
    basis = FitBasis(
        mid=_pair(_need(fb, "mid", f"{path}.fit_basis"), f"{path}.fit_basis.mid"),
        half=_pair(_need(fb, "half", f"{path}.fit_basis"), f"{path}.fit_basis.half"),
        degree=int(_need(fb, "degree", f"{path}.fit_basis")),
        jet_order=int(_need(fb, "jet_order", f"{path}.fit_basis")),
    )
    sigma2 = _pair(_need(data, "sigma2", path), f"{path}.sigma2")
    return RecoveryReport(
        chart=chart,
        degree=int(_need(data, "degree", path)),
        jet_order=int(_need(data, "jet_order", path)),
        residuals=residuals,
        jacobian_points=tuple(jac_points),
        jacobians=tuple(jacobians),
        jacobian_sign_consistent=bool(_need(data, "jacobian_sign_consistent", path)),
        rotation=rotation,
        basis=basis,
        gram_inv=np.asarray(_need(data, "gram_inv", path), dtype=float),
        sigma2=sigma2,
        warnings=tuple(data.get("warnings", ())),
    )


# ---------------------------------------------------------------------------
# generation config

def parse_generate_config(data, path: str = "config"):
    """Returns (chart, region, hbars, noise) from a generation config."""
    raw_chart = _need(data, "chart", path)
    if "model" in raw_chart:
        name = raw_chart["model"]
        params = dict(raw_chart.get("params", {}))
        if "domain" in raw_chart:
            dom = raw_chart["domain"]
            if isinstance(dom, dict):
                lo = _pair(_need(dom, "min", f"{path}.chart.domain"), f"{path}.chart.domain.min")
                hi = _pair(_need(dom, "max", f"{path}.chart.domain"), f"{path}.chart.domain.max")
                params["domain"] = (lo[0], lo[1], hi[0], hi[1])
            else:
                if not isinstance(dom, (list, tuple)) or len(dom) != 4:
                    raise SchemaError("chart.domain must be [xmin, ymin, xmax, ymax]",
                                      where=f"{path}.chart.domain")
                params["domain"] = tuple(float(v) for v in dom)
        from .charts import model_system
        try:
            chart = model_system(str(name), params)
        except (TypeError, ValueError) as e:
            raise SchemaError(f"invalid model chart: {e}", where=f"{path}.chart") from e
    else:
        chart = chart_from_dict(raw_chart, f"{path}.chart")
    region = region_from_dict(_need(data, "region", path), f"{path}.region")
    hbars = _need(data, "hbars", path)
    if not isinstance(hbars, list) or not hbars:
        raise SchemaError("hbars must be a non-empty list", where=f"{path}.hbars")
    try:
        hbars = [float(h) for h in hbars]
    except (TypeError, ValueError):
        raise SchemaError("hbars must be numbers", where=f"{path}.hbars") from None
    noise = noise_from_dict(data["noise"], f"{path}.noise") if "noise" in data else NoiseModel(amplitude=0.0)
    return chart, region, hbars, noise
