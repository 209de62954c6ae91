"""Command-line surface: synth | generate | equalize | eval | replay.

Every command writes a JSON manifest recording its resolved parameters,
inputs, outputs, and metric summary; `replay <manifest>` reruns the
recorded command and reproduces the output files byte for byte.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from pathlib import Path

import numpy as np

from .dataset_io import (
    TAU_HI,
    TAU_LO,
    DataMatrix,
    LabeledDataset,
    SwissRollSpec,
    gen_circle,
    gen_gaussian_mixture,
    gen_swiss_roll,
    load_csv,
    save_csv,
)
from .evaluation import ks_uniform_test, mutual_information
from .harness import clustering_compare, crossval_compare
from .kernel import BandwidthSpec
from .pipeline import PipelineError, SugarConfig, sugar, sugar_iterate

TAU = (-math.pi, math.pi)


def _load_data(path) -> DataMatrix:
    # sniff a header: a first row with any non-numeric cell
    with open(path) as fh:
        first = fh.readline().strip()
    if not first:
        raise ValueError(f"{path}: empty file")
    has_header = False
    for cell in first.split(","):
        try:
            float(cell)
        except ValueError:
            has_header = True
            break
    return load_csv(path, has_header=has_header)


def _load_labels(path, n: int) -> np.ndarray:
    m = _load_data(path)
    if m.cols != 1:
        raise ValueError(f"{path}: labels must be a single column")
    if m.rows != n:
        raise ValueError(f"{path}: {m.rows} labels for {n} points")
    labels = m.values[:, 0]
    if not np.array_equal(labels, np.round(labels)):
        raise ValueError(f"{path}: labels must be integers")
    return labels.astype(np.int64)


def _coordinate(values: np.ndarray, coord: str) -> np.ndarray:
    if coord == "angle":
        if values.shape[1] < 2:
            raise ValueError("angle coordinate needs at least 2 columns")
        return np.arctan2(values[:, 1], values[:, 0])
    if coord.startswith("col:"):
        j = int(coord[4:])
        if not 0 <= j < values.shape[1]:
            raise ValueError(f"column {j} out of range")
        return values[:, j]
    raise ValueError(f"unknown coordinate extractor {coord!r} (use angle or col:J)")


def _parse_range(text: str) -> tuple[float, float]:
    lo, _, hi = text.partition(":")
    return float(lo), float(hi)


def _coord_range(coord: str, range_text, vector) -> tuple[float, float]:
    if range_text:
        return _parse_range(range_text)
    if coord == "angle":
        return TAU
    return float(vector.min()), float(vector.max())


def _config_from(params: dict) -> SugarConfig:
    doc: dict = {}
    if params.get("config"):
        with open(params["config"]) as fh:
            doc.update(json.load(fh))
    for key in ("degree_bandwidth", "diffusion_bandwidth", "k_cov", "t", "seed",
                "max_iters", "ks_target_p", "rescale"):
        if params.get(key) is not None:
            doc[key] = params[key]
    return SugarConfig.from_dict(doc)


def _write_json(path, doc) -> None:
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def _write_report(prefix: str, metrics: dict) -> list[str]:
    json_path, csv_path = f"{prefix}_report.json", f"{prefix}_report.csv"
    flat = {k: v for k, v in metrics.items() if isinstance(v, (int, float, str, bool))}
    _write_json(json_path, flat)
    lines = ["metric,value"] + [f"{k},{flat[k]}" for k in sorted(flat)]
    Path(csv_path).write_text("\n".join(lines) + "\n")
    return [json_path, csv_path]


def run_synth(params: dict):
    kind = params["kind"]
    out = params["out"]
    if kind == "circle":
        data = gen_circle(params["n"], params.get("bias", 0.0), params.get("seed", 0))
        labels = None
    elif kind == "swiss":
        theta_min = params.get("theta_min")
        theta_max = params.get("theta_max")
        spec = SwissRollSpec(
            n=params["n"],
            theta_range=(TAU_LO if theta_min is None else theta_min,
                         TAU_HI if theta_max is None else theta_max),
            theta_bias=params.get("theta_bias", 1.0),
            h_range=(params.get("h_min", 0.0), params.get("h_max", 20.0)),
            seed=params.get("seed", 0),
        )
        data = gen_swiss_roll(spec)
        labels = None
    elif kind == "mixture":
        with open(params["components"]) as fh:
            comps = json.load(fh)
        components = [(c["mean"], c["cov"], c["weight"], c["label"]) for c in comps]
        labeled = gen_gaussian_mixture(components, params["n"], params.get("seed", 0))
        data, labels = labeled.data, labeled.labels
    else:
        raise ValueError(f"unknown synth kind {kind!r}")
    save_csv(data, out)
    outputs = [out]
    if labels is not None:
        labels_path = str(Path(out).with_name(Path(out).stem + "_labels.csv"))
        save_csv(DataMatrix(labels[:, None].astype(float), ("label",)), labels_path)
        outputs.append(labels_path)
    inputs = [params["components"]] if kind == "mixture" else []
    return inputs, outputs, {"rows": data.rows, "cols": data.cols}, params.get("seed", 0)


def run_generate(params: dict):
    cfg = _config_from(params)
    data = _load_data(params["in"])
    result = sugar(data, cfg)
    prefix = params["out_prefix"]
    gen_path, comb_path = f"{prefix}_generated.csv", f"{prefix}_combined.csv"
    save_csv(result.generated, gen_path)
    save_csv(result.combined, comb_path)
    record = result.history[-1]
    metrics = {
        "n_input": record.n_input,
        "m_generated": record.m_generated,
        "degree_variance_before": record.degree_variance_before,
        "degree_variance_after": record.degree_variance_after,
        "config": cfg.to_dict(),
    }
    return [params["in"]], [gen_path, comb_path], metrics, cfg.seed


def run_equalize(params: dict):
    cfg = _config_from(params)
    data = _load_data(params["in"])
    coord = params.get("coord")
    eval_coord = eval_range = None
    if coord:
        eval_coord = lambda values: _coordinate(values, coord)
        eval_range = _coord_range(coord, params.get("range"), eval_coord(data.values))
    result = sugar_iterate(data, cfg, eval_coord, eval_range)
    prefix = params["out_prefix"]
    gen_path, comb_path = f"{prefix}_generated.csv", f"{prefix}_combined.csv"
    save_csv(result.generated, gen_path)
    save_csv(result.combined, comb_path)
    metrics = {
        "iterations": len(result.history),
        "m_generated": result.generated.rows,
        "degree_variance_before": result.history[0].degree_variance_before,
        "degree_variance_after": result.history[-1].degree_variance_after,
        "final_ks_p": result.history[-1].ks_p,
        "history": [rec.to_dict() for rec in result.history],
        "config": cfg.to_dict(),
    }
    return [params["in"]], [gen_path, comb_path], metrics, cfg.seed


def run_eval(params: dict):
    task = params["task"]
    prefix = params["out_prefix"]
    inputs = [params["in"]]
    data = _load_data(params["in"])
    if task == "ks":
        vector = _coordinate(data.values, params["coord"])
        lo, hi = _coord_range(params["coord"], params.get("range"), vector)
        res = ks_uniform_test(vector, (lo, hi))
        metrics = {"statistic": res.statistic, "p_value": res.p_value, "n": res.n,
                   "range_lo": lo, "range_hi": hi}
        seed = None
    elif task == "mi":
        u = data.values[:, params["col_x"]]
        v = data.values[:, params["col_y"]]
        metrics = {"mi_nats": mutual_information(u, v, params.get("bins"))}
        seed = None
    elif task in ("classify", "cluster"):
        labels = _load_labels(params["labels"], data.rows)
        labeled = LabeledDataset(data, labels)
        inputs.append(params["labels"])
        cfg = _config_from(params)
        seed = cfg.seed
        if task == "classify":
            result = crossval_compare(
                labeled,
                folds=params.get("folds", 5),
                knn_k=params.get("k", 5),
                cfg=cfg,
                smote_k=params.get("smote_k", 5),
                smote_ratio=params.get("smote_ratio", 1.0),
                seed=cfg.seed,
            )
            metrics = {k: v for k, v in result.items() if not k.startswith("report_")}
        else:
            metrics = clustering_compare(
                labeled,
                k=params.get("k") or labeled.n_classes,
                cfg=cfg,
                threshold=params.get("threshold", float(np.exp(-1.0))),
                seed=cfg.seed,
            )
    else:
        raise ValueError(f"unknown eval task {task!r}")
    outputs = _write_report(prefix, metrics)
    return inputs, outputs, metrics, seed


COMMANDS = {
    "synth": run_synth,
    "generate": run_generate,
    "equalize": run_equalize,
    "eval": run_eval,
}


def _manifest_path(command: str, params: dict) -> str:
    if command == "synth":
        out = Path(params["out"])
        return str(out.with_name(out.stem + ".manifest.json"))
    return f"{params['out_prefix']}.manifest.json"


def execute(command: str, params: dict) -> str:
    """Run one command and write its manifest; returns the manifest path."""
    started = time.perf_counter()
    inputs, outputs, metrics, seed = COMMANDS[command](params)
    manifest = {
        "command": command,
        "params": params,
        "inputs": inputs,
        "outputs": outputs,
        "seed": seed,
        "wall_time_s": time.perf_counter() - started,
        "metrics": metrics,
    }
    path = _manifest_path(command, params)
    _write_json(path, manifest)
    return path


def run_replay(manifest_path: str, out_dir: str | None = None) -> str:
    with open(manifest_path) as fh:
        manifest = json.load(fh)
    command = manifest["command"]
    if command not in COMMANDS:
        raise ValueError(f"manifest names unknown command {command!r}")
    params = dict(manifest["params"])
    if out_dir:
        target = Path(out_dir)
        target.mkdir(parents=True, exist_ok=True)
        if command == "synth":
            params["out"] = str(target / Path(params["out"]).name)
        else:
            params["out_prefix"] = str(target / Path(params["out_prefix"]).name)
    return execute(command, params)


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON file of config fields")
    p.add_argument("--degree-bw", dest="degree_bandwidth", metavar="MODE:ARG",
                   help="degree bandwidth, e.g. maxmin:2.0 or fixed:0.5")
    p.add_argument("--diffusion-bw", dest="diffusion_bandwidth", metavar="MODE:ARG",
                   help="diffusion bandwidth, e.g. adaptive:10")
    p.add_argument("--k-cov", dest="k_cov", type=int, help="covariance neighbor count")
    p.add_argument("--t", type=int, help="diffusion time")
    p.add_argument("--seed", type=int, help="random seed")
    p.add_argument("--no-rescale", dest="rescale", action="store_false", default=None,
                   help="skip the output rescaling stage")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sugar",
        description="Generate points along a dataset's manifold so density equalizes.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    synth = sub.add_parser("synth", help="write a synthetic dataset CSV")
    kinds = synth.add_subparsers(dest="kind", required=True)
    circle = kinds.add_parser("circle")
    circle.add_argument("--n", type=int, required=True)
    circle.add_argument("--bias", type=float, default=0.0)
    circle.add_argument("--seed", type=int, default=0)
    circle.add_argument("--out", required=True)
    swiss = kinds.add_parser("swiss")
    swiss.add_argument("--n", type=int, required=True)
    swiss.add_argument("--theta-bias", dest="theta_bias", type=float, default=1.0)
    swiss.add_argument("--theta-min", dest="theta_min", type=float)
    swiss.add_argument("--theta-max", dest="theta_max", type=float)
    swiss.add_argument("--h-min", dest="h_min", type=float, default=0.0)
    swiss.add_argument("--h-max", dest="h_max", type=float, default=20.0)
    swiss.add_argument("--seed", type=int, default=0)
    swiss.add_argument("--out", required=True)
    mixture = kinds.add_parser("mixture")
    mixture.add_argument("--components", required=True,
                         help="JSON list of {mean, cov, weight, label}")
    mixture.add_argument("--n", type=int, required=True)
    mixture.add_argument("--seed", type=int, default=0)
    mixture.add_argument("--out", required=True)

    generate = sub.add_parser("generate", help="one synthesis pass over a CSV")
    generate.add_argument("--in", dest="in_path", required=True)
    generate.add_argument("--out-prefix", dest="out_prefix", required=True)
    _add_config_flags(generate)

    equalize = sub.add_parser("equalize", help="iterate passes until density equalizes")
    equalize.add_argument("--in", dest="in_path", required=True)
    equalize.add_argument("--out-prefix", dest="out_prefix", required=True)
    equalize.add_argument("--max-iters", dest="max_iters", type=int)
    equalize.add_argument("--ks-target-p", dest="ks_target_p", type=float)
    equalize.add_argument("--coord", help="K-S coordinate: angle or col:J")
    equalize.add_argument("--range", help="K-S range lo:hi")
    _add_config_flags(equalize)

    ev = sub.add_parser("eval", help="evaluation reports")
    tasks = ev.add_subparsers(dest="task", required=True)
    ks = tasks.add_parser("ks")
    ks.add_argument("--in", dest="in_path", required=True)
    ks.add_argument("--coord", required=True, help="angle or col:J")
    ks.add_argument("--range", help="lo:hi (default: angle range or data range)")
    ks.add_argument("--out-prefix", dest="out_prefix", required=True)
    classify = tasks.add_parser("classify")
    classify.add_argument("--in", dest="in_path", required=True)
    classify.add_argument("--labels", required=True)
    classify.add_argument("--folds", type=int, default=5)
    classify.add_argument("--k", type=int, default=5)
    classify.add_argument("--smote-k", dest="smote_k", type=int, default=5)
    classify.add_argument("--smote-ratio", dest="smote_ratio", type=float, default=1.0)
    classify.add_argument("--out-prefix", dest="out_prefix", required=True)
    _add_config_flags(classify)
    cluster = tasks.add_parser("cluster")
    cluster.add_argument("--in", dest="in_path", required=True)
    cluster.add_argument("--labels", required=True)
    cluster.add_argument("--k", type=int, help="cluster count (default: class count)")
    cluster.add_argument("--threshold", type=float, default=float(np.exp(-1.0)))
    cluster.add_argument("--out-prefix", dest="out_prefix", required=True)
    _add_config_flags(cluster)
    mi = tasks.add_parser("mi")
    mi.add_argument("--in", dest="in_path", required=True)
    mi.add_argument("--col-x", dest="col_x", type=int, required=True)
    mi.add_argument("--col-y", dest="col_y", type=int, required=True)
    mi.add_argument("--bins", type=int)
    mi.add_argument("--out-prefix", dest="out_prefix", required=True)

    replay = sub.add_parser("replay", help="rerun a command from its manifest")
    replay.add_argument("manifest")
    replay.add_argument("--out-dir", dest="out_dir")
    return parser


def _params_from_args(args: argparse.Namespace) -> dict:
    params = {k: v for k, v in vars(args).items()
              if k not in ("command",) and v is not None}
    if "in_path" in params:
        params["in"] = params.pop("in_path")
    return params


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "replay":
            run_replay(args.manifest, args.out_dir)
        else:
            execute(args.command, _params_from_args(args))
        return 0
    except PipelineError as err:
        print(json.dumps({"error": str(err.cause), "step": err.step,
                          "stage": err.name}), file=sys.stderr)
        return 1
    except Exception as err:
        print(json.dumps({"error": str(err), "type": type(err).__name__}), file=sys.stderr)
        return 1


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
