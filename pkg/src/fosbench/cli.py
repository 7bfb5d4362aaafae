"""Config-driven command line: build | features | split | eval | diagnose | predict.

Every subcommand takes --config (JSON; TOML on interpreters with tomllib)
plus flags that override config fields, writes its artifacts under the run
directory, and embeds the resolved config hash and seed into every output
file so reruns are verifiable byte-for-byte. Exit codes: 0 ok, 1 usage,
2 data error, 3 numeric failure.
"""

import argparse
import hashlib
import json
import sys
from pathlib import Path

from . import baselines, corpus, diagnostics, evaluation, features, graph, sampling

DEFAULT_CONFIG = {
    "concepts": None,
    "works": None,
    "embeddings": None,
    "out_dir": "run",
    "seed": 0,
    "strict": False,
    "horizon": [1827, 2024],
    "roots": None,
    "drop_ancestor_pairs": False,
    "dump_works": False,
    "manifest": {"train": [2002, 2017], "val": [2018, 2021], "test": [2022, 2024]},
    "sampler": {},
    "train": {},
    "features": {"pca_dim": 100, "drop": []},
    "eval": {"scorer": "edgebank", "regimes": ["random"], "batch_size": 300,
             "edgebank_window": None, "audit": False},
    "predict": {"t": None, "top_k": 10, "budget": None, "scorer": "edgebank",
                "checkpoint": None},
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _load_config_file(path) -> dict:
    text = Path(path).read_bytes()
    if str(path).endswith(".toml"):
        try:
            import tomllib
        except ImportError as exc:
            raise UsageError("TOML configs need Python >= 3.11; use JSON") from exc
        return tomllib.loads(text.decode("utf-8"))
    return json.loads(text.decode("utf-8"))


def resolve_config(args) -> dict:
    """Defaults <- config file <- command-line flags (flags win)."""
    cfg = json.loads(json.dumps(DEFAULT_CONFIG))
    if getattr(args, "config", None):
        file_cfg = _load_config_file(args.config)
        for key, value in file_cfg.items():
            if isinstance(value, dict) and isinstance(cfg.get(key), dict):
                cfg[key].update(value)
            else:
                cfg[key] = value
    for key in ("concepts", "works", "embeddings", "out_dir", "seed", "strict", "roots",
                "drop_ancestor_pairs", "dump_works"):
        value = getattr(args, key, None)
        if value is not None:
            cfg[key] = value
    if getattr(args, "pca_dim", None) is not None:
        cfg["features"]["pca_dim"] = args.pca_dim
    if getattr(args, "drop", None) is not None:
        cfg["features"]["drop"] = [s for s in args.drop.split(",") if s]
    if getattr(args, "regime", None) is not None:
        cfg["eval"]["regimes"] = [s for s in args.regime.split(",") if s]
    if getattr(args, "scorer", None) is not None:
        cfg["eval"]["scorer"] = args.scorer
        cfg["predict"]["scorer"] = args.scorer
    if getattr(args, "neighbors", None) is not None:
        cfg["sampler"]["neighbor_strategy"] = args.neighbors
    if getattr(args, "S", None) is not None:
        cfg["sampler"]["S"] = args.S
    if getattr(args, "alpha", None) is not None:
        cfg["sampler"]["alpha"] = args.alpha
    if getattr(args, "edgebank_window", None) is not None:
        cfg["eval"]["edgebank_window"] = args.edgebank_window
    if getattr(args, "audit", False):
        cfg["eval"]["audit"] = True
    if getattr(args, "checkpoint", None) is not None:
        cfg["predict"]["checkpoint"] = args.checkpoint
    if getattr(args, "t", None) is not None:
        cfg["predict"]["t"] = args.t
    if getattr(args, "top_k", None) is not None:
        cfg["predict"]["top_k"] = args.top_k
    if getattr(args, "budget", None) is not None:
        cfg["predict"]["budget"] = args.budget
    return cfg


def config_hash(cfg: dict) -> str:
    canon = json.dumps(cfg, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode("utf-8")).hexdigest()[:16]


def _meta(cfg) -> dict:
    return {"config_hash": config_hash(cfg), "seed": cfg["seed"]}


def _out_dir(cfg) -> Path:
    out = Path(cfg["out_dir"])
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_command_manifest(cfg, command: str, artifacts: list[str], extra: dict | None = None):
    out = _out_dir(cfg)
    blob = {"command": command, "config_hash": config_hash(cfg), "seed": cfg["seed"],
            "artifacts": sorted(Path(a).name for a in artifacts)}
    if extra:
        blob.update(extra)
    path = out / f"{command}_manifest.json"
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(blob, fh, indent=1, sort_keys=True)
        fh.write("\n")
    return path


def _sampler_config(cfg, regime=None) -> sampling.SamplerConfig:
    kw = dict(cfg["sampler"])
    kw.setdefault("seed", cfg["seed"])
    if regime is not None:
        kw["regime"] = regime
    return sampling.SamplerConfig(**kw)


def _train_config(cfg) -> baselines.TrainConfig:
    kw = dict(cfg["train"])
    kw.setdefault("seed", cfg["seed"])
    return baselines.TrainConfig(**kw)


def _manifest(cfg) -> graph.SplitManifest:
    manifest = cfg["manifest"]
    if isinstance(manifest, str):
        manifest = _load_config_file(manifest)
    return graph.SplitManifest.from_dict(manifest)


def _load_catalog(cfg) -> corpus.ConceptCatalog:
    if not cfg["concepts"]:
        raise UsageError("a concepts path is required (--concepts or config)")
    with open(cfg["concepts"], encoding="utf-8") as fh:
        catalog = corpus.parse_concepts(fh, strict=cfg["strict"])
    if cfg["roots"]:
        catalog = corpus.filter_domain(catalog, cfg["roots"])
    return catalog


def _write_vertices(path, vertices, meta) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for k, v in meta.items():
            fh.write(f"# {k}={v}\n")
        for v in vertices:
            fh.write(v + "\n")


def _read_vertices(path) -> list[str]:
    with open(path, encoding="utf-8") as fh:
        return [line.strip() for line in fh
                if line.strip() and not line.startswith("#")]


def _load_graph(cfg) -> graph.TemporalGraph:
    out = _out_dir(cfg)
    stream = out / "edge_stream.csv"
    vertices_file = out / "vertices.txt"
    if not stream.exists():
        raise UsageError(f"no edge stream at {stream}; run `fosbench build` first")
    vertices = _read_vertices(vertices_file) if vertices_file.exists() else None
    return graph.read_edge_stream(stream, vertices=vertices, horizon=tuple(cfg["horizon"]))


def _drop_ancestor_pairs(g: graph.TemporalGraph, catalog: corpus.ConceptCatalog):
    """Ablation: remove events whose endpoints are hierarchically related."""
    kept = [e for e in g.events
            if e.v not in catalog.ancestor_closure(e.u)
            and e.u not in catalog.ancestor_closure(e.v)]
    return graph.TemporalGraph(vertices=g.vertices, horizon=g.horizon, events=kept)


def cmd_build(cfg) -> int:
    catalog = _load_catalog(cfg)
    if not cfg["works"]:
        raise UsageError("a works path is required (--works or config)")
    report = corpus.ParseReport()
    horizon = tuple(cfg["horizon"])
    out = _out_dir(cfg)
    meta = _meta(cfg)
    with open(cfg["works"], encoding="utf-8") as fh:
        works = corpus.parse_works(fh, catalog, horizon, report=report, strict=cfg["strict"])
        if cfg["dump_works"]:
            # intermediate corpus: one row per kept work, input order, closures sorted
            import csv as _csv
            with open(out / "works_closed.csv", "w", newline="", encoding="utf-8") as wfh:
                for k, v in meta.items():
                    wfh.write(f"# {k}={v}\n")
                writer = _csv.writer(wfh, lineterminator="\n")
                writer.writerow(["work_id", "year", "field_ids"])

                def tee(stream):
                    for w in stream:
                        writer.writerow([w.work_id, w.year, " ".join(sorted(w.field_ids))])
                        yield w
                g = graph.build(tee(works), catalog, horizon)
        else:
            g = graph.build(works, catalog, horizon)
    if cfg["drop_ancestor_pairs"]:
        g = _drop_ancestor_pairs(g, catalog)
    graph.write_edge_stream(g, out / "edge_stream.csv", meta)
    _write_vertices(out / "vertices.txt", g.vertices, meta)
    active = {v for e in g.events for v in (e.u, e.v)}
    summary = {
        "meta": meta,
        "catalog_nodes": len(catalog),
        "active_nodes": len(active),
        "events": len(g.events),                      # distinct (u,v,year)
        "event_weight_total": sum(e.weight for e in g.events),  # paper multiplicity
        "distinct_pairs": len(g.pair_years()),
        "works_parsed": report.parsed,
        "works_skipped": report.skipped,
        "concept_lines": catalog.parse_report.lines if catalog.parse_report else None,
    }
    with open(out / "catalog_summary.json", "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=1, sort_keys=True)
        fh.write("\n")
    artifacts = ["edge_stream.csv", "vertices.txt", "catalog_summary.json"]
    if cfg["dump_works"]:
        artifacts.append("works_closed.csv")
    _write_command_manifest(cfg, "build", artifacts)
    print(f"catalog nodes: {summary['catalog_nodes']}  active: {summary['active_nodes']}")
    print(f"events: {summary['events']}  total weight: {summary['event_weight_total']}")
    print(f"works parsed: {report.parsed}  skipped: {report.skipped}")
    return 0


def cmd_features(cfg) -> int:
    catalog = _load_catalog(cfg)
    if not cfg["embeddings"]:
        raise UsageError("an embeddings path is required (--embeddings or config)")
    table = features.load_embedding_table(cfg["embeddings"])
    if len(table) == 0:
        raise features.FeatureError(f"embedding table {cfg['embeddings']} is empty")
    drop = cfg["features"]["drop"]
    raw = features.compose(catalog, table, drop=drop)
    k = cfg["features"]["pca_dim"]
    nft = features.NodeFeatureTable.from_raw(raw, k)
    out = _out_dir(cfg)
    meta = _meta(cfg)
    features.write_embedding_table(raw, out / "features_raw.tsv", meta)
    features.write_embedding_table(nft.reduced, out / "features_reduced.tsv", meta)
    with open(out / "pca_basis.json", "w", encoding="utf-8") as fh:
        json.dump({"meta": meta, **nft.basis.to_dict()}, fh, sort_keys=True)
        fh.write("\n")
    _write_command_manifest(cfg, "features",
                            ["features_raw.tsv", "features_reduced.tsv", "pca_basis.json"],
                            {"drop": sorted(drop), "pca_dim": k})
    print(f"features: {len(raw)} nodes, raw dim {table.dim}, reduced dim {k}, "
          f"dropped {sorted(drop) if drop else 'none'}")
    return 0


def cmd_split(cfg) -> int:
    g = _load_graph(cfg)
    manifest = _manifest(cfg)
    train_ev, val_ev, test_ev = graph.split(g, manifest)
    out = _out_dir(cfg)
    meta = _meta(cfg)
    for name, events in (("train", train_ev), ("val", val_ev), ("test", test_ev)):
        sub = graph.TemporalGraph(vertices=g.vertices, horizon=g.horizon, events=events)
        graph.write_edge_stream(sub, out / f"{name}.csv", meta)
        print(f"{name}: {len(events)} events")
    _write_command_manifest(cfg, "split", ["train.csv", "val.csv", "test.csv"],
                            {"manifest": manifest.to_dict()})
    return 0


def _load_features(cfg) -> features.NodeFeatureTable:
    out = _out_dir(cfg)
    reduced_path = out / "features_reduced.tsv"
    basis_path = out / "pca_basis.json"
    if not reduced_path.exists():
        raise UsageError(f"no reduced features at {reduced_path}; run `fosbench features`")
    reduced_tab = features.load_embedding_table(reduced_path)
    basis = None
    if basis_path.exists():
        with open(basis_path, encoding="utf-8") as fh:
            basis = features.PcaBasis.from_dict(json.load(fh))
    return features.NodeFeatureTable(raw={}, reduced=reduced_tab.vectors, basis=basis)


def _make_scorer(cfg, name, manifest, nft=None, trained_params=None):
    if name == "edgebank":
        return baselines.EdgeBankMemory(mode="infinite")
    if name == "edgebank-tw":
        window = cfg["eval"]["edgebank_window"] or len(manifest.test)
        return baselines.EdgeBankMemory(mode="time_window", window_years=window)
    if name == "neural":
        if nft is None:
            raise UsageError("the neural scorer needs features; run `fosbench features`")
        if trained_params is None:
            raise UsageError("no trained parameters supplied for the neural scorer")
        return baselines.NeuralScorer(trained_params, nft, _sampler_config(cfg))
    raise UsageError(f"unknown scorer {name!r}")


def cmd_eval(cfg) -> int:
    g = _load_graph(cfg)
    manifest = _manifest(cfg)
    train_ev, val_ev, test_ev = graph.split(g, manifest)
    pools = sampling.build_pools(g.vertices, train_ev, val_ev, test_ev)
    out = _out_dir(cfg)
    meta = _meta(cfg)
    scorer_name = cfg["eval"]["scorer"]
    artifacts = ["eval_report.json", "eval_report.txt"]

    nft = None
    trained = None
    if scorer_name == "neural":
        nft = _load_features(cfg)
        result = baselines.train(g, manifest, nft, _train_config(cfg), _sampler_config(cfg),
                                 pools=pools)
        trained = result.params
        baselines.save_checkpoint(out / "checkpoint.json", trained, _train_config(cfg),
                                  _sampler_config(cfg), meta)
        baselines.write_training_log(result.log, out / "training_log.csv", meta)
        artifacts += ["checkpoint.json", "training_log.csv"]
        print(f"trained: best epoch {result.best_epoch} val AP {result.best_val_ap:.4f}")

    audit_rows = []
    reports = []
    for regime in cfg["eval"]["regimes"]:
        scfg = _sampler_config(cfg, regime=regime)
        scorer = _make_scorer(cfg, scorer_name, manifest, nft, trained)
        audit = (lambda u, v, t, origin: audit_rows.append((regime, u, v, t, origin))) \
            if cfg["eval"]["audit"] else None
        reports.append(evaluation.evaluate(scorer, g, test_ev, pools, scfg,
                                           batch_size=cfg["eval"]["batch_size"], audit=audit))
    merged = evaluation.merge_reports(reports)
    with open(out / "eval_report.json", "w", encoding="utf-8") as fh:
        fh.write(merged.to_json(meta))
    with open(out / "eval_report.txt", "w", encoding="utf-8") as fh:
        fh.write(merged.table())
    if cfg["eval"]["audit"]:
        import csv as _csv
        with open(out / "negatives_audit.csv", "w", newline="", encoding="utf-8") as fh:
            for k, v in meta.items():
                fh.write(f"# {k}={v}\n")
            writer = _csv.writer(fh, lineterminator="\n")
            writer.writerow(["regime", "u", "v", "t", "origin"])
            writer.writerows(audit_rows)
        artifacts.append("negatives_audit.csv")
    _write_command_manifest(cfg, "eval", artifacts, {"scorer": scorer_name})
    print(merged.table(), end="")
    return 0


def cmd_diagnose(cfg) -> int:
    g = _load_graph(cfg)
    manifest = _manifest(cfg)
    report = diagnostics.compute_report(g, manifest, meta=_meta(cfg))
    out = _out_dir(cfg)
    written = diagnostics.write_report(report, out)
    _write_command_manifest(cfg, "diagnose", written)
    s = report.summary()
    print(f"novelty {s['novelty']:.4f}  recurrence {s['recurrence']:.4f}  "
          f"surprise {s['surprise']:.4f}")
    return 0


def cmd_predict(cfg) -> int:
    g = _load_graph(cfg)
    manifest = _manifest(cfg)
    t = cfg["predict"]["t"]
    if t is None:
        raise UsageError("predict needs a reference year (--t or config predict.t)")
    scorer_name = cfg["predict"]["scorer"]
    nft = None
    trained = None
    if scorer_name == "neural":
        nft = _load_features(cfg)
        ckpt = cfg["predict"]["checkpoint"]
        if ckpt is None:
            raise UsageError("predict with the neural scorer needs --checkpoint")
        trained, _, _, _ = baselines.load_checkpoint(ckpt)
    scorer = _make_scorer(cfg, scorer_name, manifest, nft, trained)
    rows = evaluation.rank_emerging(scorer, g, t, cfg["predict"]["top_k"],
                                    budget=cfg["predict"]["budget"], seed=cfg["seed"])
    out = _out_dir(cfg)
    evaluation.write_ranked_pairs(rows, out / "emerging.csv", _meta(cfg))
    _write_command_manifest(cfg, "predict", ["emerging.csv"],
                            {"t": t, "top_k": cfg["predict"]["top_k"]})
    for rank, (u, v, score) in enumerate(rows[:10], start=1):
        print(f"{rank:>3} {u} -- {v}  {score:.4f}")
    print(f"{len(rows)} candidate pairs written")
    return 0


COMMANDS = {
    "build": cmd_build,
    "features": cmd_features,
    "split": cmd_split,
    "eval": cmd_eval,
    "diagnose": cmd_diagnose,
    "predict": cmd_predict,
}

DATA_ERRORS = (
    corpus.CorpusError, graph.GraphError, features.FeatureError,
    sampling.SamplingError, evaluation.EvaluationError,
    diagnostics.DiagnosticsError, OSError, json.JSONDecodeError,
    KeyError, ValueError, TypeError,
)


def build_parser() -> _Parser:
    p = _Parser(prog="fosbench", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", help="JSON (or TOML) run config")
        sp.add_argument("--out-dir", dest="out_dir")
        sp.add_argument("--seed", type=int)
        sp.add_argument("--concepts")
        sp.add_argument("--works")
        sp.add_argument("--embeddings")
        sp.add_argument("--strict", action="store_const", const=True, default=None)
        sp.add_argument("--roots", type=lambda s: [x for x in s.split(",") if x])
        sp.add_argument("--drop-ancestor-pairs", dest="drop_ancestor_pairs",
                        action="store_const", const=True, default=None)
        sp.add_argument("--dump-works", dest="dump_works",
                        action="store_const", const=True, default=None)
        sp.add_argument("--regime", help="comma-separated sampling regimes")
        sp.add_argument("--neighbors", choices=sampling.NEIGHBOR_STRATEGIES)
        sp.add_argument("--S", type=int)
        sp.add_argument("--alpha", type=float)
        sp.add_argument("--scorer", choices=["edgebank", "edgebank-tw", "neural"])
        sp.add_argument("--edgebank-window", dest="edgebank_window", type=int)
        sp.add_argument("--audit", action="store_true")
        sp.add_argument("--pca-dim", dest="pca_dim", type=int)
        sp.add_argument("--drop", help="comma-separated feature names to ablate")
        sp.add_argument("--checkpoint")
        sp.add_argument("--t", type=int)
        sp.add_argument("--top-k", dest="top_k", type=int)
        sp.add_argument("--budget", type=int)
        sp.add_argument("--threads", type=int, default=1,
                        help="worker cap for internal parallelism (1 = serial)")
    return p


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        cfg = resolve_config(args)
        return COMMANDS[args.command](cfg)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except baselines.TrainingDiverged as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 3
    except baselines.BaselineError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3 if "non-finite" in str(exc) else 2
    except DATA_ERRORS as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
