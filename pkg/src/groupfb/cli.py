"""Command-line front end.

Verbs::

    groupfb group validate   --spec group.json
    groupfb fb analyze       --spec group.json --filters bank.json [--format csv]
    groupfb fb verify-pr     --spec group.json --filters bank.json
    groupfb fb design-dual   --spec group.json --filters bank.json
    groupfb sample build          --spec problem.json
    groupfb sample demo-crystal   --spec crystal.json --mode average|pointwise
    groupfb sample demo-dihedral  --q 16 --K 2

Exit codes: 0 success, 2 invalid input, 3 mathematical rejection (samples
insufficient, degenerate generator, or PR demanded but absent).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from .crystal import CrystalSpec, build_crystal_group, demo_average, demo_pointwise, dihedral_crystal
from .errors import DegenerateGeneratorError, SingularPolyphaseError, StructureError
from .io import (
    InputError,
    complex_array,
    digest,
    dumps,
    errors_csv,
    load_group,
    polyphase_csv,
    read_document,
    signals_from_json,
)
from .polyphase import (
    FRAME_TOL,
    PR_TOL,
    analysis_matrix,
    classify_pair,
    design_dual_pseudoinverse,
    frame_bounds,
    frame_constants,
    generator_matrix,
    synthesis_matrix,
    verify_pr,
)
from .sampling import SamplingProblem, UnitaryRep, build_reconstruction, fixed_probe_samples
from .signals import involution

EXIT_OK, EXIT_INPUT, EXIT_REJECT = 0, 2, 3


@dataclass
class RunConfig:
    command: str
    spec: Optional[Path] = None
    filters: Optional[Path] = None
    out: Optional[Path] = None
    format: str = "json"
    tol_pr: float = PR_TOL
    tol_frame: float = FRAME_TOL
    seed: int = 7
    trials: int = 100
    mode: str = "average"
    q: int = 16
    M: int = 2
    K: Optional[int] = None
    threads: int = 1
    inputs: list = field(default_factory=list)

    def __post_init__(self):
        if not (self.tol_pr > 0 and self.tol_frame > 0):
            raise ValueError("tolerances must be positive")
        if self.trials < 0:
            raise ValueError("--trials must be non-negative")
        if self.format not in ("json", "csv"):
            raise ValueError(f"unknown format {self.format!r}")

    def meta(self, input_digest: str) -> dict:
        return {
            "tool": "groupfb",
            "version": __version__,
            "command": self.command,
            "input_digest": input_digest,
            "tolerances": {"pr": self.tol_pr, "frame": self.tol_frame},
            "seed": self.seed,
        }


def thread_count() -> int:
    raw = os.environ.get("GROUPFB_THREADS", "1").strip() or "1"
    try:
        n = int(raw)
    except ValueError:
        raise ValueError(f"GROUPFB_THREADS must be an integer, got {raw!r}") from None
    if n < 0:
        raise ValueError("GROUPFB_THREADS must be >= 0")
    return n or (os.cpu_count() or 1)


class Outcome:
    def __init__(self, code: int, result: dict, table: Optional[str] = None):
        self.code, self.result, self.table = code, result, table


def _require(path: Optional[Path], flag: str) -> Path:
    if path is None:
        raise InputError(f"missing required option {flag}")
    return path


def _group_and_bank(cfg: RunConfig):
    doc, raw = read_document(_require(cfg.filters, "--filters"), "filters")
    cfg.inputs.append(raw)
    if cfg.spec is not None:
        gdoc, graw = read_document(cfg.spec, "group")
        cfg.inputs.insert(0, graw)
    elif "group" in doc:
        gdoc = doc["group"]
    else:
        raise InputError("no group: pass --spec or embed 'group' in the filters file")
    G = load_group(gdoc, str(cfg.spec or cfg.filters))
    bank = {k: signals_from_json(G, doc[k], k) for k in ("analysis", "generators", "synthesis") if k in doc}
    return G, bank


def cmd_group_validate(cfg: RunConfig) -> Outcome:
    doc, raw = read_document(_require(cfg.spec, "--spec"), "group")
    cfg.inputs.append(raw)
    G = load_group(doc, str(cfg.spec))
    abelian = bool(np.array_equal(G.H.table, G.H.table.T)) and bool((G.phi == np.arange(G.N.order)).all())
    return Outcome(EXIT_OK, {"valid": True, "N_moduli": list(G.N.moduli), "L": G.L, "order": G.order, "abelian": abelian})


def cmd_fb_analyze(cfg: RunConfig) -> Outcome:
    G, bank = _group_and_bank(cfg)
    if "generators" in bank:
        gens = bank["generators"]
    elif "analysis" in bank:
        gens = [involution(h) for h in bank["analysis"]]
    else:
        raise InputError("fb analyze needs 'generators' or 'analysis' filters")
    if "synthesis" in bank:
        if len(bank["synthesis"]) != len(gens):
            raise InputError("generators and synthesis filters must have the same count")
        report = classify_pair(gens, bank["synthesis"], cfg.tol_pr, cfg.tol_frame)
    else:
        report = frame_bounds(gens, cfg.tol_pr, cfg.tol_frame)
    return Outcome(EXIT_OK, {"frame_report": report.to_dict()}, polyphase_csv(generator_matrix(gens)))


def cmd_fb_verify_pr(cfg: RunConfig) -> Outcome:
    G, bank = _group_and_bank(cfg)
    if "analysis" not in bank or "synthesis" not in bank:
        raise InputError("fb verify-pr needs 'analysis' and 'synthesis' filters")
    if len(bank["analysis"]) != len(bank["synthesis"]):
        raise InputError("analysis and synthesis banks must have the same number of channels")
    v = verify_pr(bank["analysis"], bank["synthesis"], cfg.tol_pr)
    return Outcome(EXIT_OK if v.pr else EXIT_REJECT, v.to_dict())


def cmd_fb_design_dual(cfg: RunConfig) -> Outcome:
    G, bank = _group_and_bank(cfg)
    if "analysis" not in bank:
        raise InputError("fb design-dual needs 'analysis' filters")
    h = bank["analysis"]
    fc = frame_constants(analysis_matrix(h))
    g = design_dual_pseudoinverse(h, cfg.tol_frame)
    v = verify_pr(h, g, cfg.tol_pr)
    result = {"A_H": fc.lower, "B_H": fc.upper, "pr": v.pr, "max_dev": v.max_dev, "synthesis": g}
    return Outcome(EXIT_OK if v.pr else EXIT_REJECT, result, polyphase_csv(synthesis_matrix(g)))


def _problem_from_doc(doc: dict) -> SamplingProblem:
    rep_doc = doc["rep"]
    model = None
    if rep_doc.get("name") == "quasi_regular":
        spec = CrystalSpec(rep_doc["d"], rep_doc["q"], rep_doc["M"], tuple(rep_doc["Gamma"]), offset=rep_doc.get("offset"))
        model = build_crystal_group(spec)
        rep = model.rep
    else:
        if "group" not in doc:
            raise InputError("explicit representation matrices need a 'group'")
        G = load_group(doc["group"])
        rep = UnitaryRep(G, complex_array(rep_doc["matrices"]))
        rep.validate()
    a = complex_array(doc["generator"])
    probes = doc["probes"]
    if probes["mode"] == "average":
        return SamplingProblem(rep, a, "average", probes=complex_array(probes["vectors"]))
    if probes["mode"] == "fixed":
        return fixed_probe_samples(rep, a, complex_array(probes["vector"]))
    pts = []
    for t in probes["points"]:
        if isinstance(t, list):
            if model is None:
                raise InputError("coordinate points need a quasi_regular representation")
            pts.append(model.grid_index(t))
        else:
            pts.append(int(t))
    return SamplingProblem(rep, a, "pointwise", points=pts)


def cmd_sample_build(cfg: RunConfig) -> Outcome:
    doc, raw = read_document(_require(cfg.spec, "--spec"), "problem")
    cfg.inputs.append(raw)
    try:
        problem = _problem_from_doc(doc)
    except (ValueError, TypeError) as e:
        if isinstance(e, InputError):
            raise
        raise InputError(f"{cfg.spec}: {e}") from None
    kit = build_reconstruction(problem, tol_frame=cfg.tol_frame, tol_pr=cfg.tol_pr)
    return Outcome(EXIT_OK, {"reconstruction_kit": kit.to_dict()})


def _demo_outcome(cfg: RunConfig, spec: CrystalSpec, probes=None, points=None, K=None) -> Outcome:
    kwargs = dict(K=K, trials=cfg.trials, seed=cfg.seed, tol_pr=cfg.tol_pr, tol_frame=cfg.tol_frame, workers=cfg.threads)
    if cfg.mode == "average":
        report = demo_average(spec, probes=probes, **kwargs)
    else:
        report = demo_pointwise(spec, points=points, **kwargs)
    return Outcome(EXIT_OK, report, errors_csv(report["trial_errors"]))


def cmd_sample_demo_crystal(cfg: RunConfig) -> Outcome:
    doc, raw = read_document(_require(cfg.spec, "--spec"), "crystal")
    cfg.inputs.append(raw)
    spec = CrystalSpec.from_dict(doc)
    probes = complex_array(doc["probes"]) if "probes" in doc else None
    return _demo_outcome(cfg, spec, probes=probes, points=doc.get("points"), K=doc.get("K"))


def cmd_sample_demo_dihedral(cfg: RunConfig) -> Outcome:
    params = {"q": cfg.q, "M": cfg.M, "K": cfg.K, "mode": cfg.mode, "trials": cfg.trials, "seed": cfg.seed}
    cfg.inputs.append(json.dumps(params, sort_keys=True).encode())
    return _demo_outcome(cfg, dihedral_crystal(cfg.q, cfg.M), K=cfg.K if cfg.K is not None else 2)


COMMANDS = {
    "group validate": cmd_group_validate,
    "fb analyze": cmd_fb_analyze,
    "fb verify-pr": cmd_fb_verify_pr,
    "fb design-dual": cmd_fb_design_dual,
    "sample build": cmd_sample_build,
    "sample demo-crystal": cmd_sample_demo_crystal,
    "sample demo-dihedral": cmd_sample_demo_dihedral,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--spec", type=Path)
    common.add_argument("--out", type=Path, help="output path (default: stdout)")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--tol-pr", type=float, default=PR_TOL)
    common.add_argument("--tol-frame", type=float, default=FRAME_TOL)
    common.add_argument("--seed", type=int, default=7)

    fb = argparse.ArgumentParser(add_help=False)
    fb.add_argument("--filters", type=Path)

    demo = argparse.ArgumentParser(add_help=False)
    demo.add_argument("--trials", type=int, default=100)
    demo.add_argument("--mode", choices=("average", "pointwise"), default="average")

    parser = argparse.ArgumentParser(prog="groupfb", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=f"groupfb {__version__}")
    top = parser.add_subparsers(dest="noun", required=True)

    group = top.add_parser("group").add_subparsers(dest="verb", required=True)
    group.add_parser("validate", parents=[common])

    fbp = top.add_parser("fb").add_subparsers(dest="verb", required=True)
    for verb in ("analyze", "verify-pr", "design-dual"):
        fbp.add_parser(verb, parents=[common, fb])

    sample = top.add_parser("sample").add_subparsers(dest="verb", required=True)
    sample.add_parser("build", parents=[common])
    sample.add_parser("demo-crystal", parents=[common, demo])
    dih = sample.add_parser("demo-dihedral", parents=[common, demo])
    dih.add_argument("--q", type=int, default=16)
    dih.add_argument("--M", type=int, default=2)
    dih.add_argument("--K", type=int, default=None)
    return parser


def _emit(cfg: RunConfig, text: str) -> None:
    if cfg.out is None:
        sys.stdout.write(text)
    else:
        cfg.out.parent.mkdir(parents=True, exist_ok=True)
        cfg.out.write_text(text)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    command = f"{args.noun} {args.verb}"
    try:
        cfg = RunConfig(
            command=command,
            **{k: v for k, v in vars(args).items() if k not in ("noun", "verb") and v is not None},
            threads=thread_count(),
        )
    except ValueError as e:
        print(f"groupfb: error: {e}", file=sys.stderr)
        return EXIT_INPUT

    table = None
    try:
        outcome = COMMANDS[command](cfg)
        code, result, table = outcome.code, outcome.result, outcome.table
    except (InputError, StructureError) as e:
        code, result = EXIT_INPUT, {"error": str(e)}
    except (SingularPolyphaseError, DegenerateGeneratorError) as e:
        code, result = EXIT_REJECT, {"error": str(e)}
        if isinstance(e, SingularPolyphaseError):
            result.update(gamma=list(e.gamma), lambda_min=e.lambda_min, threshold=e.threshold)

    if code != EXIT_OK:
        print(f"groupfb: {result.get('error', 'rejected')}", file=sys.stderr)
    if cfg.format == "csv" and table is not None:
        _emit(cfg, table)
    elif cfg.format == "csv" and code == EXIT_OK:
        print(f"groupfb: error: --format csv is not available for '{command}'", file=sys.stderr)
        return EXIT_INPUT
    else:
        report = {**cfg.meta(digest(*cfg.inputs)), "exit_code": code, **result}
        _emit(cfg, dumps(report))
    return code


if __name__ == "__main__":
    sys.exit(main())
