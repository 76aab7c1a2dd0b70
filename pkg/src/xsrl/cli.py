"""Command-line front end: ``xsrl <subcommand> ...``.

Every subcommand that writes ``--out`` also writes ``<out>.prov.json`` with
the effective configuration digest, the seed and sha256 digests of all
inputs and outputs.  Exit codes: 0 success, 1 data error, 2 usage error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import sys
from pathlib import Path

from xsrl import __version__
from xsrl.alignment import format_pharaoh, intersect, parse_pharaoh
from xsrl.corpus import corpus_stats, load_embeddings, read_conll, write_conll
from xsrl.errors import XsrlError
from xsrl.eval import report, score_both
from xsrl.model.config import LEMMA_MODES, PRESETS, ModelConfig, preset
from xsrl.model.decode import tag_corpus
from xsrl.model.io import load_model, save_model
from xsrl.model.network import ArgumentModel, PredicateIdentifier, SenseModel
from xsrl.model.train import train
from xsrl.morphology import compile_lexicon, lexicon_from_json, load_lemma_lexicon
from xsrl.projection import project_corpus

logger = logging.getLogger("xsrl")

# alignment density thresholds: European targets, and the looser Chinese setting
DENSITY_PRESETS = {"european": 0.8, "chinese": 0.6}


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def _read_text(path) -> str:
    return Path(path).read_text(encoding="utf-8")


def _write_text(path, text: str):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _lines(path) -> list[str]:
    text = _read_text(path)
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    return lines


def _canonical(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def write_provenance(out, command: str, inputs: dict, outputs: list, settings: dict,
                     config: ModelConfig | None = None):
    """``<out>.prov.json``; no timestamps or absolute paths, so reruns are byte-identical."""
    record = {
        "command": command,
        "version": __version__,
        "seed": None if config is None else config.seed,
        "config_sha256": (config.digest() if config is not None
                          else hashlib.sha256(_canonical(settings).encode()).hexdigest()),
        "settings": settings,
        "inputs": {k: {"file": Path(p).name, "sha256": sha256_file(p)} for k, p in sorted(inputs.items())
                   if p is not None},
        "outputs": {Path(p).name: sha256_file(p) for p in outputs},
    }
    _write_text(str(out) + ".prov.json", json.dumps(record, sort_keys=True, indent=1) + "\n")


# -- subcommands --------------------------------------------------------------

def cmd_intersect(args) -> int:
    fwd, rev = _lines(args.fwd), _lines(args.rev)
    src = read_conll(_read_text(args.src)) if args.src else None
    tgt = _lines(args.tgt) if args.tgt else None
    if len(fwd) != len(rev):
        raise XsrlError(f"{args.fwd} has {len(fwd)} lines, {args.rev} has {len(rev)}")
    for name, seq in (("source", src), ("target", tgt)):
        if seq is not None and len(seq) != len(fwd):
            raise XsrlError(f"{name} has {len(seq)} sentences, alignments have {len(fwd)}")
    out = []
    n_links = 0
    for k, (f, r) in enumerate(zip(fwd, rev)):
        s_len = len(src[k]) if src is not None else None
        t_len = len(tgt[k].split()) if tgt is not None else None
        try:
            a_fwd = parse_pharaoh(f, s_len, t_len)
            a_rev = (parse_pharaoh(r, t_len, s_len).flipped() if not args.rev_source_first
                     else parse_pharaoh(r, s_len, t_len))
            align = intersect(a_fwd, a_rev, s_len, t_len)
        except XsrlError as exc:
            raise type(exc)(f"sentence {k + 1}: {exc}") from None
        n_links += len(align)
        out.append(format_pharaoh(align.links) + "\n")
    _write_text(args.out, "".join(out))
    print(json.dumps({"sentences": len(out), "links": n_links}))
    write_provenance(args.out, "intersect", {"fwd": args.fwd, "rev": args.rev, "src": args.src, "tgt": args.tgt},
                     [args.out], {"rev_source_first": args.rev_source_first})
    return 0


def _density(args) -> float:
    if args.min_density is not None:
        return args.min_density
    return DENSITY_PRESETS[args.density_preset]


def cmd_project(args) -> int:
    threshold = _density(args)
    if not 0.0 <= threshold <= 1.0:
        raise XsrlError(f"--min-density must lie in [0, 1], got {threshold}")
    src = read_conll(_read_text(args.src))
    tgt = [line.split() for line in _lines(args.tgt)]
    corpus, stats = project_corpus(src, tgt, _lines(args.fwd), _lines(args.rev), threshold,
                                   rev_target_first=not args.rev_source_first)
    _write_text(args.out, write_conll(corpus))
    line = json.dumps(stats.to_json(), sort_keys=True)
    _write_text(str(args.out) + ".stats.json", line + "\n")
    print(line)
    write_provenance(args.out, "project", {"src": args.src, "tgt": args.tgt, "fwd": args.fwd, "rev": args.rev},
                     [args.out, str(args.out) + ".stats.json"],
                     {"min_density": threshold, "rev_source_first": args.rev_source_first})
    return 0


def cmd_stats(args) -> int:
    line = json.dumps(corpus_stats(read_conll(_read_text(args.input))), sort_keys=True)
    print(line)
    if args.out:
        _write_text(args.out, line + "\n")
        write_provenance(args.out, "stats", {"input": args.input}, [args.out], {})
    return 0


def cmd_stem_compile(args) -> int:
    if args.lemmas:
        lexicon = load_lemma_lexicon(_read_text(args.segmentation))
    else:
        lexicon = compile_lexicon(_read_text(args.segmentation))
    _write_text(args.out, lexicon.dumps())
    print(json.dumps({"known": len(lexicon.known_stems), "prefixes": len(lexicon.prefixes),
                      "suffixes": len(lexicon.suffixes)}))
    write_provenance(args.out, "stem-compile", {"segmentation": args.segmentation}, [args.out],
                     {"lemmas": args.lemmas})
    return 0


def resolve_config(args) -> ModelConfig:
    """Preset, then ``--config`` JSON, then explicit flags (flags win)."""
    cfg = preset(args.preset)
    if args.config:
        try:
            overrides = json.loads(_read_text(args.config))
        except json.JSONDecodeError as exc:
            raise XsrlError(f"{args.config}: invalid JSON ({exc})") from None
        if not isinstance(overrides, dict):
            raise XsrlError(f"{args.config}: expected a JSON object")
        cfg = ModelConfig.from_json({**cfg.to_json(), **overrides})
    return cfg.with_overrides(seed=args.seed, epochs=args.epochs,
                              lemma_mode=getattr(args, "lemma_mode", None))


def _load_lexicon(path, mode: str):
    if mode == "char":
        return None
    if path is None:
        raise XsrlError(f"lemma mode {mode!r} needs --lexicon")
    text = _read_text(path)
    if text.lstrip().startswith("{"):
        return lexicon_from_json(json.loads(text))
    return load_lemma_lexicon(text) if mode == "slem" else compile_lexicon(text)


def _train(args, cls) -> int:
    cfg = resolve_config(args)
    corpus = read_conll(_read_text(args.train))
    pretrained = None
    if args.embeddings:
        with open(args.embeddings, encoding="utf-8") as fh:
            pretrained = load_embeddings(fh, cfg.d_w)
    lexicon_path = getattr(args, "lexicon", None)
    lexicon = _load_lexicon(lexicon_path, cfg.lemma_mode) if cls is ArgumentModel else None
    net = cls.build(corpus, cfg, pretrained, lexicon)
    history = train(net, corpus)
    save_model(net, args.out)
    print(json.dumps({"kind": net.kind, "epochs": len(history),
                      "final_loss": history[-1] if history else None}))
    write_provenance(args.out, f"train-{net.kind}",
                     {"train": args.train, "embeddings": args.embeddings, "lexicon": lexicon_path},
                     [args.out, str(args.out) + ".json"], {"preset": args.preset}, cfg)
    return 0


def cmd_tag(args) -> int:
    corpus = read_conll(_read_text(args.input))
    models = {"args": load_model(args.args, "args"),
              "senses": load_model(args.senses, "senses") if args.senses else None,
              "predid": load_model(args.predid, "predid") if args.predid else None}
    out = tag_corpus(corpus, models["args"], models["senses"], models["predid"], threads=args.threads)
    _write_text(args.out, write_conll(out))
    write_provenance(args.out, "tag", {"input": args.input, "args": args.args, "senses": args.senses,
                                       "predid": args.predid}, [args.out], {})
    return 0


def cmd_score(args) -> int:
    scores = score_both(read_conll(_read_text(args.gold)), read_conll(_read_text(args.pred)))
    text, doc = report(scores)
    print(text)
    if args.out:
        _write_text(args.out, doc + "\n")
        write_provenance(args.out, "score", {"gold": args.gold, "pred": args.pred}, [args.out], {})
    return 0


# -- parser ---------------------------------------------------------------------

def _model_flags(p: argparse.ArgumentParser, lemma: bool):
    p.add_argument("--train", required=True, help="training corpus (CoNLL)")
    p.add_argument("--out", required=True, help="checkpoint path; the sidecar goes to <out>.json")
    p.add_argument("--embeddings", help="pre-trained word vectors (text, dim = d_w)")
    p.add_argument("--preset", choices=sorted(PRESETS), default="desk")
    p.add_argument("--config", help="JSON object of ModelConfig overrides")
    p.add_argument("--seed", type=int)
    p.add_argument("--epochs", type=int)
    if lemma:
        p.add_argument("--lemma-mode", choices=LEMMA_MODES)
        p.add_argument("--lexicon", help="stem lexicon JSON, segmentation file (ustem) or lemma file (slem)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="xsrl", description="Cross-lingual SRL via annotation projection.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log training progress")
    sub = parser.add_subparsers(dest="command", metavar="command")
    sub.required = True

    def aligned(p):
        p.add_argument("--fwd", required=True, help="source-to-target alignments (pharaoh)")
        p.add_argument("--rev", required=True, help="target-to-source alignments (pharaoh, target index first)")
        p.add_argument("--rev-source-first", action="store_true",
                       help="the --rev file is already written source index first")

    p = sub.add_parser("intersect", help="one-to-one alignments from two directional files")
    aligned(p)
    p.add_argument("--src", help="source CoNLL file, for length checks")
    p.add_argument("--tgt", help="target text, one sentence per line, for length checks")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_intersect)

    p = sub.add_parser("project", help="project source frames onto target sentences")
    aligned(p)
    p.add_argument("--src", required=True, help="annotated source CoNLL file")
    p.add_argument("--tgt", required=True, help="target text, one tokenized sentence per line")
    p.add_argument("--out", required=True, help="projected CoNLL output")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--min-density", type=float, help="keep sentences with alignment density >= this")
    g.add_argument("--density-preset", choices=sorted(DENSITY_PRESETS), default="european")
    p.set_defaults(func=cmd_project)

    p = sub.add_parser("stats", help="sentence, token, type and predicate counts")
    p.add_argument("input")
    p.add_argument("--out")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("stem-compile", help="compile a segmentation (or lemma) file into a stem lexicon")
    p.add_argument("segmentation", help="word<TAB>morph/TAG ... lines")
    p.add_argument("--lemmas", action="store_true", help="input is word<TAB>lemma instead")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_stem_compile)

    for name, cls, lemma in (("train-args", ArgumentModel, True), ("train-senses", SenseModel, False),
                             ("train-predid", PredicateIdentifier, False)):
        p = sub.add_parser(name, help=f"train the {cls.__name__}")
        _model_flags(p, lemma)
        p.set_defaults(func=lambda a, cls=cls: _train(a, cls))

    p = sub.add_parser("tag", help="label a CoNLL corpus")
    p.add_argument("--input", required=True)
    p.add_argument("--args", required=True, help="argument model checkpoint")
    p.add_argument("--senses", help="sense model checkpoint (default: keep the input's senses)")
    p.add_argument("--predid", help="predicate identifier checkpoint (default: keep the input's predicates)")
    p.add_argument("--threads", type=int, help="decoding threads (default: $SRL_THREADS or 1)")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_tag)

    p = sub.add_parser("score", help="labeled F1 with gold and automatic senses")
    p.add_argument("--gold", required=True)
    p.add_argument("--pred", required=True)
    p.add_argument("--out", help="JSON report")
    p.set_defaults(func=cmd_score)
    return parser


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(name)s: %(message)s")
    try:
        return args.func(args)
    except (XsrlError, OSError, UnicodeDecodeError) as exc:
        print(f"xsrl {args.command}: error: {exc}", file=sys.stderr)
        return 1


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
