"""Command-line entry point: ``weightscope <command> [options]``.

Commands: layers, gini, blocks, compare, experts, ortho, verify. Results
go to ``--out``; progress goes to stderr. Exit codes: 0 success, 2 config
error, 3 ingestion error, 4 numerical error, 5 verification mismatch.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import (BLOCK_SIZES, SimilarityMatrix, block_profile, cross_model_series,
                       distance_profile, expert_heatmap, gini, layer_heatmap, make_m_theta,
                       offdiag_avg_cos, similarity_ratio)
from .checkpoint import CheckpointIndex, Role, RoleTag, load_oriented, open_checkpoint
from .checkpoint.naming import resolve_naming
from .errors import (ArgError, DimError, DomainError, DuplicateTensorError, NonFiniteError,
                     ParseError, ShapeError, SlotNotFoundError, StateError, UsageError,
                     ZeroColumnError)
from .simcore import COMPARED_KINDS, IndexKind, IndexParams

log = logging.getLogger("weightscope")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INGEST = 3
EXIT_NUMERIC = 4
EXIT_MISMATCH = 5

COMMANDS = ("layers", "gini", "blocks", "compare", "experts", "ortho", "verify")
FORMATS = frozenset({"csv", "json", "png"})
DEFAULT_THETAS = (0.001, 0.002, 0.003, 0.005)

_INGEST_ERRORS = (ParseError, DuplicateTensorError, ShapeError, SlotNotFoundError,
                  NonFiniteError, FileNotFoundError)
_NUMERIC_ERRORS = (DimError, ZeroColumnError, DomainError, ArgError, UsageError, StateError,
                   np.linalg.LinAlgError)


class ConfigError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    checkpoints: list[Path] = field(default_factory=list)
    naming: str = "llama"
    roles: list[str] = field(default_factory=list)
    kinds: list[IndexKind] = field(default_factory=lambda: [IndexKind.DOCS])
    svcca_threshold: float = 0.99
    aggregate: str = "max"
    seed: int = 42
    tile: int = 512
    out: Path = Path("weightscope-out")
    formats: frozenset = frozenset({"csv", "json"})
    compute_dtype: str = "f32"
    layers: list[int] = field(default_factory=list)
    thetas: tuple[float, ...] = DEFAULT_THETAS
    stdout_json: bool = False
    reuse: bool = False

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}")
        if not 0.0 < self.svcca_threshold <= 1.0:
            raise ConfigError("--svcca-threshold must lie in (0, 1]")
        if self.tile < 1:
            raise ConfigError("--tile must be positive")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("--seed must be an unsigned 64-bit integer")
        if not self.formats <= FORMATS:
            raise ConfigError(f"unknown output format(s): {sorted(self.formats - FORMATS)}")
        if self.aggregate == "mean":
            self.kinds = [IndexKind.DOCS_MEAN if k is IndexKind.DOCS else k for k in self.kinds]
        # keep first occurrence order
        self.kinds = list(dict.fromkeys(self.kinds))
        try:
            self.out.mkdir(parents=True, exist_ok=True)
            probe = self.out / ".weightscope-write-test"
            probe.write_text("")
            probe.unlink()
        except OSError as exc:
            raise ConfigError(f"output directory {self.out} is not writable: {exc}") from None

    @property
    def params(self) -> IndexParams:
        return IndexParams(svcca_threshold=self.svcca_threshold, tile=self.tile)


def _fmt(x) -> str:
    if x is None or (isinstance(x, float) and np.isnan(x)):
        return ""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".9g")


class Emitter:
    """Writes output files in order and remembers their names."""

    def __init__(self, cfg: RunConfig):
        self.cfg = cfg
        self.files: list[str] = []

    def wants(self, fmt: str) -> bool:
        return fmt in self.cfg.formats

    def _path(self, name: str) -> Path:
        self.files.append(name)
        log.info("writing %s", name)
        return self.cfg.out / name

    def csv(self, name: str, header: list, rows: list[list]) -> None:
        with open(self._path(name), "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for row in rows:
                w.writerow([c if isinstance(c, str) else _fmt(c) for c in row])

    def json(self, name: str, doc) -> None:
        self._path(name).write_text(json.dumps(doc, indent=1, allow_nan=False) + "\n")

    def png(self, name: str, draw, sidecar: bool = False) -> None:
        draw(self._path(name))
        if sidecar:
            self.files.append(str(Path(name).with_suffix(".scale.json")))


def _heatmap_doc(sim: SimilarityMatrix) -> dict:
    return {
        "model_id": sim.model_id,
        "role": str(sim.role) if sim.role is not None else None,
        "kind": sim.kind.value,
        "labels": list(sim.labels),
        "values": sim.values.tolist(),
    }


def _emit_heatmap(em: Emitter, stem: str, sim: SimilarityMatrix, axis: str = "layer") -> None:
    if em.wants("csv"):
        header = [axis] + list(sim.labels)
        rows = [[label] + list(row) for label, row in zip(sim.labels, sim.values)]
        em.csv(f"{stem}.csv", header, rows)
    if em.wants("json"):
        em.json(f"{stem}.json", _heatmap_doc(sim))
    if em.wants("png"):
        from .render import heatmap_png
        title = f"{sim.model_id} {sim.role} {sim.kind.value}".strip()
        em.png(f"{stem}.png", lambda p: heatmap_png(sim.values, p, title, sim.labels),
               sidecar=True)


def read_heatmap_csv(path) -> tuple[list[int], np.ndarray]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    labels = [int(v) for v in rows[0][1:]]
    values = np.array([[float(v) for v in r[1:]] for r in rows[1:]])
    return labels, values


# --- helpers -----------------------------------------------------------------

def _model_id(path: Path) -> str:
    return path.stem if path.is_file() else path.name


def _open_single(cfg: RunConfig) -> tuple[CheckpointIndex, str]:
    if not cfg.checkpoints:
        raise ConfigError("--checkpoint is required")
    log.info("indexing %s", ", ".join(map(str, cfg.checkpoints)))
    return open_checkpoint(cfg.checkpoints, cfg.naming), _model_id(cfg.checkpoints[0])


def _dense_roles(cfg: RunConfig, default: str) -> list[RoleTag]:
    names = cfg.roles or [default]
    try:
        return [RoleTag.parse(r) for r in names]
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _heatmap(cfg: RunConfig, index, role, kind, model_id) -> SimilarityMatrix:
    log.info("computing %s heatmap for %s", kind.value, role)
    return layer_heatmap(index, role, kind, cfg.params, cfg.compute_dtype, model_id)


# --- commands ----------------------------------------------------------------

def cmd_layers(cfg: RunConfig, em: Emitter) -> dict:
    index, model_id = _open_single(cfg)
    summary = {}
    for role in _dense_roles(cfg, "MlpUp"):
        for kind in cfg.kinds:
            sim = _heatmap(cfg, index, role, kind, model_id)
            stem = f"{role}_{kind.value}"
            _emit_heatmap(em, f"heatmap_{stem}", sim)
            prof = distance_profile(sim)
            if em.wants("csv"):
                em.csv(f"distance_{stem}.csv", ["distance", "mean_sim", "std_sim"],
                       [list(r) for r in zip(prof.distances, prof.mean_sim, prof.std_sim)])
            if em.wants("png"):
                from .render import profile_png
                em.png(f"distance_{stem}.png", lambda p: profile_png(
                    {kind.value: (prof.distances, prof.mean_sim)}, p, f"{model_id} {role}",
                    "layer distance", "similarity", bands={kind.value: prof.std_sim}))
            summary[stem] = _heatmap_doc(sim)
    return summary


def cmd_gini(cfg: RunConfig, em: Emitter) -> dict:
    rows, summary = [], {}
    index = model_id = None
    for role in _dense_roles(cfg, "MlpUp"):
        for kind in cfg.kinds:
            cached = cfg.out / f"heatmap_{role}_{kind.value}.csv"
            if cfg.reuse and cached.is_file():
                log.info("reusing %s", cached.name)
                _, values = read_heatmap_csv(cached)
            else:
                if index is None:
                    index, model_id = _open_single(cfg)
                values = _heatmap(cfg, index, role, kind, model_id).values
            g = gini(values)
            rows.append([str(role), kind.value, g])
            summary[f"{role}_{kind.value}"] = g
    if em.wants("csv"):
        em.csv("gini.csv", ["role", "kind", "gini"], rows)
    if em.wants("json"):
        em.json("gini.json", {"gini": [{"role": r, "kind": k, "gini": g} for r, k, g in rows]})
    return summary


def cmd_blocks(cfg: RunConfig, em: Emitter) -> dict:
    index, model_id = _open_single(cfg)
    kind = cfg.kinds[0]
    summary = {}
    for role in _dense_roles(cfg, "Wv"):
        sim = _heatmap(cfg, index, role, kind, model_id)
        profiles = {k: block_profile(sim, k) for k in BLOCK_SIZES if k <= sim.layer_count}
        for k, prof in profiles.items():
            if em.wants("csv"):
                em.csv(f"blocks_{role}_k{k}.csv", ["start", "average"],
                       [list(r) for r in zip(prof.start_indices, prof.averages)])
            summary[f"{role}_k{k}"] = prof.averages.tolist()
        if em.wants("json"):
            em.json(f"blocks_{role}.json", {
                "model_id": model_id, "role": str(role), "kind": kind.value,
                "blocks": {str(k): p.averages.tolist() for k, p in profiles.items()}})
        if em.wants("png") and profiles:
            from .render import profile_png
            series = {f"{k}x{k}": (p.start_indices, p.averages) for k, p in profiles.items()}
            em.png(f"blocks_{role}.png", lambda p: profile_png(
                series, p, f"{model_id} {role} {kind.value}", "block start layer",
                "average similarity"))
    return summary


def cmd_compare(cfg: RunConfig, em: Emitter) -> dict:
    if len(cfg.checkpoints) not in (2, 3):
        raise ConfigError("compare needs two checkpoints (A B) or three (A B C)")
    ids = [_model_id(p) for p in cfg.checkpoints]
    indexes = [open_checkpoint(p, cfg.naming) for p in cfg.checkpoints]
    summary = {}
    for role in _dense_roles(cfg, "MlpUp"):
        if len(indexes) == 2:
            series = {k: cross_model_series(indexes[0], indexes[1], role, k, cfg.params,
                                            cfg.compute_dtype) for k in cfg.kinds}
            layers = range(indexes[0].num_layers)
            if em.wants("csv"):
                em.csv(f"compare_{role}.csv", ["layer"] + [k.value for k in cfg.kinds],
                       [[layer] + [series[k][layer] for k in cfg.kinds] for layer in layers])
            doc = {"models": ids, "role": str(role),
                   "series": {k.value: v.tolist() for k, v in series.items()}}
            if em.wants("json"):
                em.json(f"compare_{role}.json", doc)
            summary[str(role)] = doc
        else:
            reports = [similarity_ratio(*indexes, role, k, cfg.params, cfg.compute_dtype,
                                        tuple(ids)) for k in cfg.kinds]
            rows = [[r.layer, rep.kind.value, r.sim_ab, r.sim_ac, r.ratio]
                    for rep in reports for r in rep.rows]
            if em.wants("csv"):
                em.csv(f"ratio_{role}.csv", ["layer", "kind", "sim_ab", "sim_ac", "ratio"], rows)
            doc = {"models": ids, "role": str(role), "ratios": [
                {"kind": rep.kind.value, "unnormalized": rep.unnormalized,
                 "rows": [{"layer": r.layer, "sim_ab": r.sim_ab, "sim_ac": r.sim_ac,
                           "ratio": r.ratio} for r in rep.rows]} for rep in reports]}
            if em.wants("json"):
                em.json(f"ratio_{role}.json", doc)
            summary[str(role)] = doc
    return summary


def cmd_experts(cfg: RunConfig, em: Emitter) -> dict:
    index, model_id = _open_single(cfg)
    try:
        roles = [Role(r) for r in cfg.roles] if cfg.roles else [
            Role.EXPERT_W1, Role.EXPERT_W2, Role.EXPERT_W3]
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    summary = {}
    found = False
    for role in roles:
        if not role.is_expert:
            raise ConfigError(f"experts command takes expert roles, got {role.value}")
        layers = cfg.layers or range(index.num_layers)
        if not (cfg.layers and cfg.roles):
            # an explicit (layer, role) request must exist; otherwise skip empty slots
            layers = [lay for lay in layers if len(index.experts(lay, role)) >= 2]
        found = found or bool(layers)
        for layer in layers:
            for kind in cfg.kinds:
                sim = expert_heatmap(index, layer, role, kind, cfg.params, cfg.compute_dtype,
                                     model_id)
                stem = f"experts_L{layer}_{role.value}_{kind.value}"
                _emit_heatmap(em, stem, sim, axis="expert")
                summary[stem] = _heatmap_doc(sim)
    if not found:
        raise SlotNotFoundError("no layer holds two or more experts for the requested roles")
    return summary


def cmd_ortho(cfg: RunConfig, em: Emitter) -> dict:
    index, model_id = _open_single(cfg)
    summary = {}
    for role in _dense_roles(cfg, "Wq") if cfg.roles else [RoleTag(Role.WQ), RoleTag(Role.WO)]:
        layers = index.layers_with(role)
        if not layers:
            raise SlotNotFoundError(f"no {role} tensors in checkpoint")
        rows = []
        per_layer = []
        shape = None
        for layer in layers:
            x = load_oriented(index, layer, role, cfg.compute_dtype)
            shape = x.shape
            value = offdiag_avg_cos(x, cfg.tile)
            per_layer.append(value)
            rows.append(["layer", layer, None, value])
        refs = {}
        for theta in cfg.thetas:
            ref = offdiag_avg_cos(make_m_theta(shape[0], theta, cfg.seed, shape[1]), cfg.tile)
            refs[theta] = ref
            rows.append(["m_theta", None, theta, ref])
        if em.wants("csv"):
            em.csv(f"ortho_{role}.csv", ["series", "layer", "theta", "offdiag_avg_cos"], rows)
        doc = {"model_id": model_id, "role": str(role), "layers": layers,
               "offdiag_avg_cos": per_layer,
               "m_theta": [{"theta": t, "offdiag_avg_cos": v} for t, v in refs.items()]}
        if em.wants("json"):
            em.json(f"ortho_{role}.json", doc)
        if em.wants("png"):
            from .render import profile_png
            series = {str(role): (np.array(layers), np.array(per_layer))}
            for t, v in refs.items():
                series[f"M_theta {t:g}"] = (np.array(layers), np.full(len(layers), v))
            em.png(f"ortho_{role}.png", lambda p: profile_png(
                series, p, f"{model_id} {role}", "layer", "off-diagonal mean |cos|"))
        summary[str(role)] = doc
    return summary


def cmd_verify(cfg: RunConfig, em: Emitter) -> dict:
    from .verify import run_suite
    result = run_suite(seed=cfg.seed, progress=log.info)
    doc = result.to_json()
    em.json("verify_report.json", doc)
    if not result.passed:
        raise VerificationMismatch(doc)
    return doc


class VerificationMismatch(Exception):
    def __init__(self, doc):
        super().__init__("verification classifications do not match expectations")
        self.doc = doc


HANDLERS = {
    "layers": cmd_layers, "gini": cmd_gini, "blocks": cmd_blocks, "compare": cmd_compare,
    "experts": cmd_experts, "ortho": cmd_ortho, "verify": cmd_verify,
}


# --- argument parsing ----------------------------------------------------------

def _kinds(values: list[str]) -> list[IndexKind]:
    out = []
    for v in values:
        for part in v.split(","):
            if part.strip().lower() == "all":
                out.extend(COMPARED_KINDS)
            elif part.strip():
                out.append(IndexKind.parse(part))
    return out


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--checkpoint", nargs="+", action="extend", default=[], type=Path,
                        metavar="PATH", help="safetensors file(s) or NPY/shard directory")
    common.add_argument("--naming", default="llama",
                        help="preset (llama, gemma, mixtral) or JSON naming config path")
    common.add_argument("--role", nargs="+", action="extend", default=[], metavar="TAG")
    common.add_argument("--kind", nargs="+", action="extend", default=[], metavar="KIND",
                        help="index kind(s), comma lists allowed; 'all' = the eight compared")
    common.add_argument("--svcca-threshold", type=float, default=0.99)
    common.add_argument("--aggregate", choices=("max", "mean"), default="max")
    common.add_argument("--tile", type=int, default=512)
    common.add_argument("--seed", type=int, default=42)
    common.add_argument("--out", type=Path, default=Path("weightscope-out"))
    common.add_argument("--format", default="csv,json", help="subset of csv,json,png")
    common.add_argument("--compute-dtype", choices=("f32", "f64"), default="f32")
    common.add_argument("--layer", nargs="+", action="extend", type=int, default=[])
    common.add_argument("--theta", nargs="+", action="extend", type=float, default=[])
    common.add_argument("--reuse", action="store_true",
                        help="gini: read existing heatmap CSVs from --out when present")
    common.add_argument("--stdout", choices=("json",), default=None,
                        help="also print one JSON document with all results")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="weightscope", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "layers": "layer-by-layer heatmaps and distance profiles",
        "gini": "Gini concentration of layer heatmaps",
        "blocks": "diagonal block averages (3x3 .. 7x7)",
        "compare": "two models: per-layer similarity; three: similarity ratio",
        "experts": "expert-by-expert heatmaps for MoE layers",
        "ortho": "off-diagonal mean |cos| per layer with M_theta references",
        "verify": "numerical verification suite",
    }
    for name in COMMANDS:
        sub.add_parser(name, parents=[common], help=helps[name])
    return parser


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    try:
        kinds = _kinds(ns.kind) if ns.kind else [IndexKind.DOCS]
        resolve_naming(ns.naming)
    except (ValueError, ParseError) as exc:
        raise ConfigError(str(exc)) from None
    return RunConfig(
        command=ns.command, checkpoints=list(ns.checkpoint), naming=ns.naming,
        roles=list(ns.role), kinds=kinds, svcca_threshold=ns.svcca_threshold,
        aggregate=ns.aggregate, seed=ns.seed, tile=ns.tile, out=ns.out,
        formats=frozenset(f.strip() for f in ns.format.split(",") if f.strip()),
        compute_dtype=ns.compute_dtype, layers=list(ns.layer),
        thetas=tuple(ns.theta) or DEFAULT_THETAS, stdout_json=ns.stdout == "json",
        reuse=ns.reuse,
    )


class _StderrHandler(logging.StreamHandler):
    """Writes to whatever ``sys.stderr`` is at emit time."""

    @property
    def stream(self):
        return sys.stderr

    @stream.setter
    def stream(self, _):
        pass


_handler = _StderrHandler()
_handler.setFormatter(logging.Formatter("%(levelname)s %(message)s"))


def _setup_logging(verbose: bool) -> None:
    if _handler not in log.handlers:
        log.addHandler(_handler)
        log.propagate = False
    log.setLevel(logging.DEBUG if verbose else logging.INFO)


def main(argv=None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    _setup_logging(ns.verbose)
    try:
        cfg = config_from_args(ns)
    except ConfigError as exc:
        log.error("%s", exc)
        return EXIT_CONFIG

    em = Emitter(cfg)
    code = EXIT_OK
    try:
        results = HANDLERS[cfg.command](cfg, em)
    except ConfigError as exc:
        log.error("%s", exc)
        return EXIT_CONFIG
    except _INGEST_ERRORS as exc:
        log.error("ingestion error (%s): %s", type(exc).__name__, exc)
        return EXIT_INGEST
    except _NUMERIC_ERRORS as exc:
        log.error("numerical error: %s", exc)
        return EXIT_NUMERIC
    except VerificationMismatch as exc:
        log.error("%s", exc)
        results, code = exc.doc, EXIT_MISMATCH

    if cfg.stdout_json:
        json.dump({"command": cfg.command, "files": em.files, "results": results},
                  sys.stdout, allow_nan=False)
        sys.stdout.write("\n")
    return code


if __name__ == "__main__":
    sys.exit(main())
