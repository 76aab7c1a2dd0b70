import json

import numpy as np
import pytest

from xsrl.corpus import NULL_ROLE, Corpus, EmbeddingTable, PredicateFrame, SemanticDependency, Sentence, Token
from xsrl.errors import CheckpointError, TrainingError, XsrlError
from xsrl.model import (ArgumentModel, ModelConfig, PredicateIdentifier, SenseModel, load_model, preset,
                        role_scores, save_model, train)
from xsrl.model.decode import tag_corpus, tag_sentence
from xsrl.morphology import LemmaLexicon, StemLexicon
from xsrl.neural import Tape
from xsrl.neural.gradcheck import gradient_errors

TINY = ModelConfig(d_w=4, d_c=3, d_ch=4, d_h=3, d_le=4, d_lemma_dec=4, d_r=3, d_pos=2, enc_depth=1,
                   lemma_depth=1, sense_depth=1, min_count=1)


def frame(p, sense, *args):
    return PredicateFrame(p, sense, tuple(SemanticDependency(i, r) for i, r in args))


def toy_corpus():
    s1 = Sentence.from_forms("we congratulate his report".split(),
                             [frame(2, "congratulate.01", (1, "A0"), (4, "A1")), frame(4, "report.01", (3, "A0"))])
    s2 = Sentence.from_forms("they report".split(), [frame(2, "report.01", (1, "A0"))],
                             labeled_mask=(True, True))
    return Corpus((s1, s2))


def with_pos(corpus):
    tags = {"we": "PRP", "they": "PRP", "his": "PRP$", "congratulate": "VB", "report": "NN"}
    return Corpus(tuple(Sentence(tuple(Token(t.index, t.form, tags[t.form]) for t in s.tokens), s.frames)
                        for s in corpus))


def perturb(net, scale=0.5, seed=0):
    rng = np.random.default_rng(seed)
    for name, value in net.store.items():
        if net.store.is_trainable(name):
            value += rng.normal(0, scale, value.shape)


class TestConfig:
    def test_presets(self):
        assert preset("desk") == ModelConfig()
        paper = preset("paper")
        assert (paper.d_w, paper.d_h, paper.d_r, paper.lr) == (100, 512, 128, 0.001)
        with pytest.raises(XsrlError):
            preset("huge")

    @pytest.mark.parametrize("kw", [{"d_h": 0}, {"d_ch": 5}, {"lemma_mode": "x"}, {"lr": 0.0}, {"null_ratio": 0}])
    def test_validation(self, kw):
        with pytest.raises(XsrlError):
            ModelConfig(**kw)

    def test_json_round_trip_and_digest(self):
        cfg = TINY.with_overrides(seed=9)
        assert ModelConfig.from_json(json.loads(json.dumps(cfg.to_json()))) == cfg
        assert cfg.digest() != TINY.digest()
        with pytest.raises(XsrlError):
            ModelConfig.from_json({"bogus": 1})


class TestArgumentModel:
    def test_input_representation(self):
        net = ArgumentModel.build(toy_corpus(), TINY)
        x = net.input_representation(Tape(net.store, grad=False), toy_corpus()[0], 2).value
        assert x.shape == (4, TINY.input_dim)
        np.testing.assert_array_equal(x[:, -1], [0, 1, 0, 0])
        lemma_block = x[:, -1 - TINY.d_le:-1]
        assert lemma_block[1].any() and not lemma_block[[0, 2, 3]].any()

    def test_encode_shape(self):
        net = ArgumentModel.build(toy_corpus(), TINY)
        h = net.encode(Tape(net.store, grad=False), toy_corpus()[0], [2, 4])
        assert h.shape == (4, 2, 2 * TINY.d_h)

    def test_position_out_of_range(self):
        net = ArgumentModel.build(toy_corpus(), TINY)
        with pytest.raises(XsrlError):
            net.role_probabilities(toy_corpus()[0], [5])

    def test_probabilities_match_role_scores(self):
        corpus = toy_corpus()
        net = ArgumentModel.build(corpus, TINY)
        perturb(net)
        s = corpus[0]
        probs = net.role_probabilities(s, [2, 4])
        tape = Tape(net.store, grad=False)
        H = net.encode(tape, s, [2, 4]).value
        _, u = net.lemma_vectors(tape, ["congratulate", "report"])
        for b, p in enumerate([2, 4]):
            for i in range(len(s)):
                expect = role_scores(H[p - 1, b], H[i, b], u.value[b], net.store["U"], net.store["role_emb"])
                np.testing.assert_allclose(probs[i, b], expect, atol=1e-12)
        np.testing.assert_allclose(probs.sum(axis=-1), 1.0, atol=1e-12)

    def test_role_scores_selection(self):
        rng = np.random.default_rng(0)
        args = rng.normal(size=4), rng.normal(size=4), rng.normal(size=2), rng.normal(size=(8, 5)), rng.normal(size=(3, 3))
        full = role_scores(*args)
        np.testing.assert_allclose(role_scores(*args, roles=[2, 0]), full[[2, 0]])
        with pytest.raises(XsrlError):
            role_scores(*args, roles=[3])

    def test_zero_parameters_give_uniform_and_null(self):
        corpus = toy_corpus()
        net = ArgumentModel.build(corpus, TINY)
        net.store.zero_()
        probs = net.role_probabilities(corpus[0], [2])
        np.testing.assert_allclose(probs, 1.0 / len(net.roles))
        tagged = net.tag(corpus[0], [(2, "congratulate.01")])
        assert tagged.frames == (PredicateFrame(2, "congratulate.01"),)
        assert net.roles.itos[0] == NULL_ROLE

    def test_instances_respect_mask(self):
        corpus = toy_corpus()
        partial = Sentence(corpus[0].tokens, corpus[0].frames, (True, True, False, True))
        net = ArgumentModel.build(corpus, TINY)
        full = net.instances(Corpus((corpus[0],)))
        masked = net.instances(Corpus((partial,)))
        assert len(full) == 8 and len(masked) == 6
        assert all(key[1] != 3 for _, key, _ in masked)
        nulls = [x for x in full if x[2] == 0]
        assert len(nulls) == 5

    @pytest.mark.parametrize("mode", ["char", "ustem", "slem"])
    def test_gradients(self, mode):
        corpus = toy_corpus()
        lexicon = {"char": None, "ustem": StemLexicon({"con"}, {"ate", "s"}),
                   "slem": LemmaLexicon(known_stems={"report": "report"})}[mode]
        net = ArgumentModel.build(corpus, TINY.with_overrides(lemma_mode=mode), lexicon=lexicon)
        perturb(net, seed=3)
        insts = net.instances(corpus)
        batch = [(corpus[k], [x for x in insts if x[0] == k]) for k in range(len(corpus))]
        errors = gradient_errors(lambda t: net.batch_loss(t, batch), net.store, max_coords=6, seed=1)
        assert max(errors.values()) < 1e-4

    def test_lexicon_required(self):
        with pytest.raises(XsrlError):
            ArgumentModel.build(toy_corpus(), TINY.with_overrides(lemma_mode="ustem"))

    def test_pretrained_rows_fixed(self):
        table = EmbeddingTable(TINY.d_w, {"report": np.arange(4.0)}, trainable=False)
        net = ArgumentModel.build(toy_corpus(), TINY, pretrained=table)
        assert not net.store.is_trainable("pretrained")
        np.testing.assert_array_equal(net.store["pretrained"][1], np.arange(4.0))
        before = net.store["pretrained"].copy()
        train(net, toy_corpus(), epochs=2)
        np.testing.assert_array_equal(net.store["pretrained"], before)

    def test_pretrained_dim_mismatch(self):
        with pytest.raises(XsrlError):
            ArgumentModel.build(toy_corpus(), TINY, pretrained=EmbeddingTable(3, {"a": np.zeros(3)}))


class TestTraining:
    def test_memorizes_toy_corpus(self):
        corpus = toy_corpus()
        net = ArgumentModel.build(corpus, TINY.with_overrides(d_h=8, lr=0.02))
        losses = train(net, corpus, epochs=150)
        assert losses[-1] < losses[0] * 0.05
        for s in corpus:
            assert net.tag(s, [(f.position, f.sense) for f in s.frames]) == s

    def test_same_seed_same_losses(self):
        runs = []
        for _ in range(2):
            net = ArgumentModel.build(toy_corpus(), TINY)
            runs.append(train(net, toy_corpus(), epochs=3))
        assert runs[0] == runs[1]

    def test_minibatch_split_changes_steps_only(self):
        net = ArgumentModel.build(toy_corpus(), TINY.with_overrides(minibatch=3))
        train(net, toy_corpus(), epochs=1)
        assert net.store.step == 4  # 10 instances in batches of 3

    def test_no_training_signal(self):
        empty = Corpus((Sentence.from_forms(["a", "b"]),))
        with pytest.raises(TrainingError, match="no training signal"):
            train(ArgumentModel.build(toy_corpus(), TINY), empty)

    def test_unknown_role_at_training_time(self):
        net = ArgumentModel.build(toy_corpus(), TINY)
        odd = Corpus((Sentence.from_forms(["a", "b"], [frame(1, "x.01", (2, "A7"))]),))
        with pytest.raises(XsrlError, match="A7"):
            train(net, odd)


class TestSenseModel:
    def test_disambiguation(self):
        corpus = toy_corpus()
        net = SenseModel.build(corpus, TINY.with_overrides(d_h=6))
        train(net, corpus, epochs=150)
        assert net.disambiguate(corpus[0], [2, 4]) == ["congratulate.01", "report.01"]
        unseen = Sentence.from_forms(["zyx", "qqq"])
        assert net.disambiguate(unseen, [1])[0] in net.vocabs["senses"]
        assert net.disambiguate(unseen, []) == []

    def test_gradients(self):
        corpus = toy_corpus()
        net = SenseModel.build(corpus, TINY)
        perturb(net, seed=2)
        insts = net.instances(corpus)
        batch = [(corpus[k], [x for x in insts if x[0] == k]) for k in range(len(corpus))]
        errors = gradient_errors(lambda t: net.batch_loss(t, batch), net.store, max_coords=6)
        assert max(errors.values()) < 1e-4

    def test_needs_senses(self):
        with pytest.raises(XsrlError):
            SenseModel.build(Corpus((Sentence.from_forms(["a"]),)), TINY)


class TestPredicateIdentifier:
    def test_learns_positions(self):
        corpus = with_pos(toy_corpus())
        net = PredicateIdentifier.build(corpus, TINY.with_overrides(d_h=6))
        train(net, corpus, epochs=150)
        assert [net.identify(s) for s in corpus] == [s.predicate_positions for s in corpus]

    def test_requires_pos(self):
        with pytest.raises(XsrlError):
            PredicateIdentifier.build(toy_corpus(), TINY).identify(toy_corpus()[0])


class TestPersistence:
    def test_round_trip_predictions(self, tmp_path):
        corpus = toy_corpus()
        lexicon = StemLexicon({"con"}, {"s"})
        net = ArgumentModel.build(corpus, TINY.with_overrides(lemma_mode="ustem"), lexicon=lexicon)
        perturb(net)
        save_model(net, tmp_path / "m.bin")
        back = load_model(tmp_path / "m.bin", "args")
        assert back.lexicon == lexicon and back.vocabs == net.vocabs
        np.testing.assert_array_equal(back.role_probabilities(corpus[0], [2, 4]),
                                      net.role_probabilities(corpus[0], [2, 4]))

    def test_tampered_checkpoint(self, tmp_path):
        net = SenseModel.build(toy_corpus(), TINY)
        save_model(net, tmp_path / "m.bin")
        data = bytearray((tmp_path / "m.bin").read_bytes())
        data[-1] ^= 1
        (tmp_path / "m.bin").write_bytes(bytes(data))
        with pytest.raises(CheckpointError, match="sidecar"):
            load_model(tmp_path / "m.bin")

    def test_wrong_kind_and_missing_sidecar(self, tmp_path):
        net = SenseModel.build(toy_corpus(), TINY)
        save_model(net, tmp_path / "m.bin")
        with pytest.raises(CheckpointError):
            load_model(tmp_path / "m.bin", "args")
        (tmp_path / "m.bin.json").unlink()
        with pytest.raises(CheckpointError):
            load_model(tmp_path / "m.bin")


class TestDecode:
    def test_threads_preserve_order(self):
        corpus = toy_corpus()
        net = ArgumentModel.build(corpus, TINY)
        perturb(net)
        assert tag_corpus(corpus, net, threads=3) == tag_corpus(corpus, net, threads=1)

    def test_missing_sense_without_model(self):
        corpus = with_pos(toy_corpus())
        args = ArgumentModel.build(corpus, TINY)
        predid = PredicateIdentifier.build(corpus, TINY)
        predid.store["pid_b"] = np.array([-50.0, 50.0])  # every token becomes a predicate
        with pytest.raises(XsrlError, match="sense"):
            tag_sentence(corpus[0], args, predid=predid)

    def test_sense_model_replaces_senses(self):
        corpus = toy_corpus()
        args = ArgumentModel.build(corpus, TINY)
        senses = SenseModel.build(corpus, TINY)
        out = tag_sentence(corpus[0], args, senses)
        assert [f.position for f in out.frames] == [2, 4]
        assert all(f.sense in senses.vocabs["senses"] for f in out.frames)

    def test_threads_from_environment(self, monkeypatch):
        from xsrl.model.decode import thread_count
        monkeypatch.setenv("SRL_THREADS", "4")
        assert thread_count() == 4 and thread_count(2) == 2
