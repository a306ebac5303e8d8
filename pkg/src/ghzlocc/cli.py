"""Command-line front end. Every command prints one JSON report envelope."""
from __future__ import annotations

import argparse
import json
import sys
import time
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from .blocks import Bipartition, blocks_for, enumerate_bipartitions
from .bounds import analyze_set, construct_max_perfect_set, structural_bound
from .errors import InvalidArgument, SdpConvergenceError
from .ghz_basis import (
    Basis,
    average_entanglement,
    basis_from_dict,
    basis_to_dict,
    build_basis,
    computational_basis,
    hybrid_basis,
    maximal_basis,
    parse_set_spec,
    random_basis,
)
from .locc_sim import (
    SpatialConfiguration,
    build_block_protocol,
    build_pair_id_protocol,
    verify_conclusive,
    verify_perfect,
)
from .ppt_sdp import DiscriminationInstance, global_success_bound, instance_for, ppt_success_bound
from .qla import DensityOperator, StateVector

TOOL = "ghzlocc"


class UsageError(Exception):
    pass


def envelope(command: str, inputs: dict, results: dict, elapsed: float | None = None) -> dict:
    env = {"tool": TOOL, "version": __version__, "command": command, "inputs": inputs, "results": results}
    if elapsed is not None:
        env["timing"] = {"seconds": elapsed}
    return env


def dumps(doc: dict) -> str:
    # repr-based float output is the shortest string that parses back to the same double
    return json.dumps(doc, indent=2, ensure_ascii=False) + "\n"


def unwrap(doc: dict) -> dict:
    """Accept either a bare document or a report envelope produced by this tool."""
    if isinstance(doc, dict) and doc.get("tool") == TOOL and "results" in doc:
        return doc["results"]
    return doc


def load_json(path: str) -> dict:
    try:
        return unwrap(json.loads(Path(path).read_text(encoding="utf-8")))
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read {path}: {exc}") from None


def preset_basis(n: int, preset: str, seed: int | None) -> Basis:
    name, _, arg = preset.partition(":")
    if name == "maximal" and not arg:
        return maximal_basis(n)
    if name == "computational" and not arg:
        return computational_basis(n)
    if name == "hybrid":
        try:
            k = int(arg)
        except ValueError:
            raise UsageError(f"hybrid preset needs an integer K, got {arg!r}") from None
        if not 0 <= k < 1 << (n - 1):
            raise UsageError(f"hybrid K must satisfy 0 <= K < {1 << (n - 1)}")
        return hybrid_basis(n, k)
    if name == "random":
        if arg:
            try:
                seed = int(arg)
            except ValueError:
                raise UsageError(f"random preset needs an integer seed, got {arg!r}") from None
        if seed is None:
            raise UsageError("random preset needs a seed (random:SEED or --seed)")
        return random_basis(n, seed)
    raise UsageError(f"unknown preset {preset!r}")


def parse_alpha_sq(text: str) -> list:
    out = []
    for tok in text.split(","):
        tok = tok.strip()
        try:
            out.append(Fraction(tok) if "/" in tok else float(tok))
        except (ValueError, ZeroDivisionError):
            raise UsageError(f"bad alpha^2 value {tok!r}") from None
    return out


def resolve_basis(args) -> Basis:
    if getattr(args, "json", None):
        doc = load_json(args.json)
        if "basis" in doc and "n" not in doc:
            doc = doc["basis"]
        return basis_from_dict(doc)
    if args.n is None:
        raise UsageError("give --json BASIS_FILE or --n with --preset/--alpha-sq")
    if getattr(args, "alpha_sq", None):
        return build_basis(args.n, alpha_sq=parse_alpha_sq(args.alpha_sq))
    return preset_basis(args.n, args.preset or "maximal", args.seed)


def resolve_config(spec: str | None, n: int) -> SpatialConfiguration:
    if spec in (None, "", "separated"):
        return SpatialConfiguration.separated(n)
    return SpatialConfiguration.parse(spec, n)


def basis_inputs(args) -> dict:
    if getattr(args, "json", None):
        return {"json": args.json}
    out = {"n": args.n}
    if getattr(args, "alpha_sq", None):
        out["alpha_sq"] = args.alpha_sq
    else:
        out["preset"] = args.preset or "maximal"
        if args.seed is not None:
            out["seed"] = args.seed
    return out


def cmd_basis(args) -> tuple[dict, dict]:
    if args.n is None:
        raise UsageError("--n is required")
    basis = resolve_basis(args)
    return basis_inputs(args), basis_to_dict(basis)


def cmd_blocks(args) -> tuple[dict, dict]:
    basis = resolve_basis(args)
    if args.config:
        cfg = resolve_config(args.config, basis.num_qubits)
        if len(cfg.parties) != 2:
            raise UsageError("--config for blocks must name exactly two parties")
        cuts = [Bipartition.of(basis.num_qubits, cfg.parties[0])]
    else:
        cuts = enumerate_bipartitions(basis.num_qubits)
    out = []
    for bp in cuts:
        rows = []
        for blk in blocks_for(basis, bp):
            rows.append({
                "pair_i_k": basis.pair(blk.pair_i).k_str,
                "pair_j_k": basis.pair(blk.pair_j).k_str,
                "kind": blk.kind,
            })
        out.append({"bipartition": bp.spec(), "blocks": rows})
    return {**basis_inputs(args), "config": args.config}, {"cuts": out}


def cmd_analyze(args) -> tuple[dict, dict]:
    basis = resolve_basis(args)
    states = parse_set_spec(basis, args.set)
    cfg = resolve_config(args.config, basis.num_qubits)
    verdict = analyze_set(states, cfg)
    results = verdict.to_dict()
    results["set"] = states.spec()
    results["size"] = len(states)
    return {**basis_inputs(args), "set": args.set, "config": cfg.spec()}, results


def cmd_simulate(args) -> tuple[dict, dict]:
    basis = resolve_basis(args)
    states = parse_set_spec(basis, args.set)
    cfg = resolve_config(args.config, basis.num_qubits)
    if args.protocol == "pair-id":
        protocol = build_pair_id_protocol(basis, cfg, states)
    else:
        protocol = build_block_protocol(basis, states, cfg)
    perfect, report = verify_perfect(protocol, states)
    conclusive, identified = verify_conclusive(protocol, states)
    results = {
        "protocol": args.protocol,
        "config": cfg.spec(),
        "report": report.to_dict(),
        "perfect": perfect,
        "conclusive": conclusive,
        "identified": [str(lab) for lab in identified],
    }
    return {**basis_inputs(args), "set": args.set, "config": cfg.spec(), "protocol": args.protocol}, results


def _amplitude(x) -> complex:
    if isinstance(x, (list, tuple)):
        if len(x) != 2:
            raise UsageError(f"complex amplitude must be [re, im], got {x!r}")
        return complex(float(x[0]), float(x[1]))
    return complex(float(x))


def instance_from_doc(doc: dict) -> DiscriminationInstance:
    """Instance document: ``{"states": [...], "priors": [...], "cut": "0|1"}``
    or ``{"basis": {...}, "labels": "pair:1:+,...", "cut": "0|12", "priors": [...]}``.

    A state is a list of amplitudes (numbers or ``[re, im]``), or
    ``{"matrix": rows}`` for a density matrix.
    """
    priors = doc.get("priors")
    if "basis" in doc:
        basis = basis_from_dict(unwrap(doc["basis"]))
        states = parse_set_spec(basis, doc.get("labels", "all"))
        cfg = resolve_config(doc.get("cut"), basis.num_qubits)
        if len(cfg.parties) != 2:
            raise UsageError("the cut must name exactly two parties")
        return instance_for(states, Bipartition.of(basis.num_qubits, cfg.parties[0]), priors)
    if "states" not in doc:
        raise UsageError("instance needs 'states' or 'basis'")
    rhos = []
    for entry in doc["states"]:
        if isinstance(entry, dict):
            rows = [[_amplitude(x) for x in row] for row in entry["matrix"]]
            rhos.append(DensityOperator.from_matrix(np.array(rows)))
            continue
        vec = StateVector.from_amplitudes([_amplitude(x) for x in entry])
        if not vec.is_normalized():
            raise UsageError("state vectors must be normalized")
        rhos.append(DensityOperator.from_state(vec))
    if priors is None:
        priors = [1.0 / len(rhos)] * len(rhos)
    n = rhos[0].num_qubits
    cut = None
    if doc.get("cut"):
        cfg = resolve_config(doc["cut"], n)
        if len(cfg.parties) != 2:
            raise UsageError("the cut must name exactly two parties")
        cut = Bipartition.of(n, cfg.parties[0])
    return DiscriminationInstance(tuple(rhos), tuple(float(p) for p in priors), cut)


def cmd_sdp(args) -> tuple[dict, dict]:
    if args.json:
        doc = load_json(args.json)
        inputs = {"json": args.json}
    else:
        basis = resolve_basis(args)
        doc = {"basis": basis_to_dict(basis), "labels": args.set, "cut": args.config}
        inputs = {**basis_inputs(args), "set": args.set, "config": args.config}
    instance = instance_from_doc(doc)
    results = {"dimension": instance.dim, "num_states": len(instance.states)}
    if instance.cut is not None:
        results["cut"] = instance.cut.spec()
        results.update(ppt_success_bound(instance).to_dict())
    results["global"] = global_success_bound(instance).to_dict()
    return inputs, results


def cmd_construct(args) -> tuple[dict, dict]:
    basis = resolve_basis(args)
    states = construct_max_perfect_set(basis, args.sign)
    results = {
        "set": states.spec(),
        "size": len(states),
        "structural_bound": structural_bound(basis),
        "avg_entanglement": average_entanglement(states) if len(states) else 0.0,
    }
    return {**basis_inputs(args), "sign": args.sign}, results


COMMANDS = {
    "basis": cmd_basis,
    "blocks": cmd_blocks,
    "analyze": cmd_analyze,
    "simulate": cmd_simulate,
    "sdp": cmd_sdp,
    "construct": cmd_construct,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog=TOOL, description=__doc__)
    parser.add_argument("--version", action="version", version=f"{TOOL} {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, basis_source=True):
        if basis_source:
            p.add_argument("--json", help="input JSON document (basis file, or instance file for sdp)")
            p.add_argument("--n", type=int, help="number of qubits")
            p.add_argument("--preset", help="maximal | computational | hybrid:K | random:SEED")
            p.add_argument("--seed", type=int, help="seed for the random preset")
            p.add_argument("--alpha-sq", help="comma-separated alpha^2 per pair (floats or a/b)")
        p.add_argument("--out", help="write the report here instead of stdout")
        p.add_argument("--timing", action="store_true", help="add wall-clock timing to the envelope")

    common(sub.add_parser("basis", help="build a basis and write it as JSON"))
    p = sub.add_parser("blocks", help="list the blocks of every (or one) bipartition")
    common(p)
    p.add_argument("--config", help='two-party cut such as "0|12"; default: all cuts')
    p = sub.add_parser("analyze", help="bounds and block witnesses for a state set")
    common(p)
    p.add_argument("--set", default="all", help='state set, e.g. "all,~pair:1:-"')
    p.add_argument("--config", help='spatial configuration such as "0|1|2"; default: fully separated')
    p = sub.add_parser("simulate", help="simulate an LOCC protocol on every member of a set")
    common(p)
    p.add_argument("--set", default="all")
    p.add_argument("--config")
    p.add_argument("--protocol", choices=["pair-id", "block"], default="pair-id")
    p = sub.add_parser("sdp", help="PPT and global optimal success probabilities")
    common(p)
    p.add_argument("--set", default="all")
    p.add_argument("--config", help='cut for the PPT constraint, e.g. "0|12"')
    p = sub.add_parser("construct", help="largest perfectly distinguishable set")
    common(p)
    p.add_argument("--sign", choices=["+", "-"], default="+")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    start = time.perf_counter()
    try:
        inputs, results = COMMANDS[args.command](args)
    except (UsageError, InvalidArgument) as exc:
        parser.error(str(exc))
    except SdpConvergenceError as exc:
        print(f"{TOOL}: {exc}", file=sys.stderr)
        return 1
    elapsed = time.perf_counter() - start if args.timing else None
    text = dumps(envelope(args.command, inputs, results, elapsed))
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
