"""The three SRL networks.

Every token is featurized as ``[x_re; x_pe; x_char]``: a trainable word
embedding, a fixed pre-trained embedding looked up by lowercased form (zeros
when absent), and the final states of a character BiLSTM.

* :class:`ArgumentModel` runs one encoder pass per predicate, appending a
  lemma block that is non-zero only at the predicate row, and scores role
  ``r`` for argument ``i`` with ``W_{j,r} = relu(U [u_j; v_r])`` applied to
  ``[h_pred; h_i]``.
* :class:`SenseModel` encodes the sentence once and classifies every
  predicate position over one global sense inventory.
* :class:`PredicateIdentifier` adds a POS embedding and makes a binary
  decision per token (source side only).
"""

from __future__ import annotations

from collections import Counter
from typing import Sequence

import numpy as np

from xsrl.corpus import NULL_ROLE, PAD, Corpus, EmbeddingTable, PredicateFrame, SemanticDependency, Sentence, Vocab
from xsrl.corpus import build_vocab
from xsrl.errors import XsrlError
from xsrl.model.config import ModelConfig
from xsrl.morphology import StemLexicon, stem
from xsrl.neural import ops
from xsrl.neural.autodiff import Tape, Var
from xsrl.neural.lstm import LSTMStack, glorot
from xsrl.neural.optim import ParamStore

# (sentence index, key, gold class id); key is model specific
Instance = tuple[int, tuple, int]


def _uniform(rng, shape, scale):
    return rng.uniform(-scale, scale, size=shape)


class Network:
    kind = "base"
    input_pos = False

    def __init__(self, config: ModelConfig, vocabs: dict[str, Vocab], store: ParamStore,
                 pretrained_words: Sequence[str] = (), lexicon: StemLexicon | None = None):
        self.config = config
        self.vocabs = vocabs
        self.store = store
        self.lexicon = lexicon
        self.pretrained_vocab = Vocab(pretrained_words, specials=(PAD,))
        self.char_stack = LSTMStack("char", config.d_c, config.d_ch // 2, config.char_depth)

    # -- construction -------------------------------------------------------

    @classmethod
    def vocab_from(cls, corpus: Corpus, config: ModelConfig, lexicon) -> dict[str, Vocab]:
        v = build_vocab(corpus, config.min_count)
        return {"words": v.words, "chars": v.chars}

    @classmethod
    def build(cls, corpus: Corpus, config: ModelConfig, pretrained: EmbeddingTable | None = None,
              lexicon: StemLexicon | None = None) -> "Network":
        if pretrained is not None and pretrained.dim != config.d_w:
            raise XsrlError(f"pre-trained embeddings have dim {pretrained.dim}, config d_w={config.d_w}")
        vocabs = cls.vocab_from(corpus, config, lexicon)
        words = sorted(pretrained.entries) if pretrained is not None else []
        store = ParamStore()
        net = cls(config, vocabs, store, words, lexicon)
        rng = np.random.default_rng([config.seed, 0])
        net.init_params(rng, pretrained)
        return net

    def init_params(self, rng: np.random.Generator, pretrained: EmbeddingTable | None):
        c, s = self.config, self.store
        s.add("word_emb", _uniform(rng, (len(self.vocabs["words"]), c.d_w), c.init_scale))
        table = np.zeros((len(self.pretrained_vocab), c.d_w))
        for k, w in enumerate(self.pretrained_vocab.items, start=1):
            table[k] = pretrained.entries[w]
        s.add("pretrained", table, trainable=False)
        s.add("char_emb", _uniform(rng, (len(self.vocabs["chars"]), c.d_c), c.init_scale))
        self.char_stack.init(s, rng)

    # -- features -------------------------------------------------------------

    def char_final_states(self, tape: Tape, stack: LSTMStack, forms: Sequence[str]) -> Var:
        """``[last forward state; first backward state]`` of ``stack`` per form.

        Distinct forms run as one right-padded batch.
        """
        if not forms:
            raise XsrlError("character representation of zero forms")
        for f in forms:
            if not f:
                raise XsrlError("character representation of an empty form")
        chars = self.vocabs["chars"]
        uniq = list(dict.fromkeys(forms))
        lengths = np.array([len(f) for f in uniq])
        ids = np.full((lengths.max(), len(uniq)), chars.pad_id or 0, dtype=np.int64)
        for b, f in enumerate(uniq):
            ids[:len(f), b] = chars.ids(f)
        H = stack.encode(tape, ops.take(tape.param("char_emb"), ids), lengths)
        h = stack.hidden_dim
        last = H[(lengths - 1, np.arange(len(uniq)))]
        rep = ops.concat([last[:, :h], H[0, :, h:]], axis=-1)
        if len(uniq) == len(forms):
            return rep
        slot = {f: k for k, f in enumerate(uniq)}
        return ops.take(rep, [slot[f] for f in forms])

    def char_representation(self, tape: Tape, form: str) -> Var:
        return self.char_final_states(tape, self.char_stack, [form])[0]

    def token_features(self, tape: Tape, sentences: Sequence[Sentence]) -> Var:
        """Rows ``[x_re; x_pe; (x_pos;) x_char]`` for all tokens of ``sentences``
        in order, followed by one all-zero padding row."""
        forms = [f for s in sentences for f in s.forms]
        x_re = ops.take(tape.param("word_emb"), self.vocabs["words"].ids(forms))
        pre = self.pretrained_vocab.stoi
        x_pe = ops.take(tape.param("pretrained"), [pre.get(f.lower(), 0) for f in forms])
        parts = [x_re, x_pe]
        if self.input_pos:
            tags = [t.pos for s in sentences for t in s.tokens]
            if any(t is None for t in tags):
                raise XsrlError("predicate identification needs a POS column on every token")
            parts.append(ops.take(tape.param("pos_emb"), self.vocabs["pos"].ids(tags)))
        parts.append(self.char_final_states(tape, self.char_stack, forms))
        rows = ops.concat(parts, axis=-1)
        return ops.concat([rows, np.zeros((1, rows.shape[1]))], axis=0)

    @staticmethod
    def gather_index(sentences: Sequence[Sentence], columns: Sequence[int]) -> tuple[np.ndarray, np.ndarray]:
        """``(T, B)`` row index into :meth:`token_features` output for columns that
        each read sentence ``columns[b]``; padding points at the zero row."""
        offsets = np.cumsum([0] + [len(s) for s in sentences])
        lengths = np.array([len(sentences[k]) for k in columns])
        index = np.full((lengths.max(), len(columns)), offsets[-1], dtype=np.int64)
        for b, k in enumerate(columns):
            index[:lengths[b], b] = offsets[k] + np.arange(lengths[b])
        return index, lengths

    def encode_sentences(self, tape: Tape, sentences: Sequence[Sentence]) -> tuple[Var, np.ndarray]:
        """Encoder states ``(T, S, 2 d_h)`` for context-only models."""
        index, lengths = self.gather_index(sentences, range(len(sentences)))
        X = ops.take(self.token_features(tape, sentences), index)
        return self.encoder.encode(tape, X, lengths), lengths

    # -- training interface ---------------------------------------------------

    def instances(self, corpus: Corpus) -> list[Instance]:
        raise NotImplementedError

    def batch_loss(self, tape: Tape, batch: Sequence[tuple[Sentence, Sequence[Instance]]]) -> Var:
        """Summed loss of a minibatch given as ``(sentence, its instances)`` groups."""
        raise NotImplementedError


class ArgumentModel(Network):
    kind = "args"

    def __init__(self, config, vocabs, store, pretrained_words=(), lexicon=None):
        super().__init__(config, vocabs, store, pretrained_words, lexicon)
        if config.lemma_mode != "char" and lexicon is None:
            raise XsrlError(f"lemma mode {config.lemma_mode!r} needs a stem/lemma lexicon")
        self.lemma_in_stack = LSTMStack("lemma_in", config.d_c, config.d_le // 2, config.lemma_depth)
        self.lemma_dec_stack = LSTMStack("lemma_dec", config.d_c, config.d_lemma_dec // 2, config.lemma_depth)
        self.encoder = LSTMStack("enc", config.input_dim, config.d_h, config.enc_depth)

    @classmethod
    def vocab_from(cls, corpus, config, lexicon):
        v = build_vocab(corpus, config.min_count)
        vocabs = {"words": v.words, "chars": v.chars, "roles": v.roles}
        if config.lemma_mode != "char":
            if lexicon is None:
                raise XsrlError(f"lemma mode {config.lemma_mode!r} needs a stem/lemma lexicon")
            stems = Counter(stem(lexicon, s.tokens[f.position - 1].form) for s in corpus for f in s.frames)
            vocabs["stems"] = Vocab.from_counts(stems, 1)
        return vocabs

    def init_params(self, rng, pretrained):
        super().init_params(rng, pretrained)
        c, s = self.config, self.store
        if c.lemma_mode == "char":
            self.lemma_in_stack.init(s, rng)
            self.lemma_dec_stack.init(s, rng)
        else:
            n = len(self.vocabs["stems"])
            s.add("lemma_in_emb", _uniform(rng, (n, c.d_le), c.init_scale))
            s.add("lemma_dec_emb", _uniform(rng, (n, c.d_lemma_dec), c.init_scale))
        self.encoder.init(s, rng)
        s.add("role_emb", _uniform(rng, (len(self.vocabs["roles"]), c.d_r), c.init_scale))
        s.add("U", glorot(rng, 4 * c.d_h, c.d_lemma_dec + c.d_r))

    @property
    def roles(self) -> Vocab:
        return self.vocabs["roles"]

    def stem_of(self, form: str) -> str:
        return stem(self.lexicon, form)

    def lemma_vectors(self, tape: Tape, forms: Sequence[str]) -> tuple[Var, Var]:
        """Input-layer and decoder lemma vectors for predicate forms."""
        if self.config.lemma_mode == "char":
            return (self.char_final_states(tape, self.lemma_in_stack, forms),
                    self.char_final_states(tape, self.lemma_dec_stack, forms))
        ids = self.vocabs["stems"].ids(self.stem_of(f) for f in forms)
        return ops.take(tape.param("lemma_in_emb"), ids), ops.take(tape.param("lemma_dec_emb"), ids)

    def _check_positions(self, sentence: Sentence, positions: Sequence[int]):
        for p in positions:
            if not 1 <= p <= len(sentence):
                raise XsrlError(f"predicate index {p} outside 1..{len(sentence)}")

    def _inputs(self, tape, sentences, columns):
        """Encoder input ``(T, B, D)`` with one column per ``(sentence, position)``."""
        for k, p in columns:
            self._check_positions(sentences[k], [p])
        base = self.token_features(tape, sentences)
        index, lengths = self.gather_index(sentences, [k for k, _ in columns])
        x_le, u = self.lemma_vectors(tape, [sentences[k].tokens[p - 1].form for k, p in columns])
        B = len(columns)
        flagged = ops.concat([x_le, np.ones((B, 1))], axis=-1)
        flagged = ops.concat([flagged, np.zeros((1, flagged.shape[1]))], axis=0)
        slot = np.full(index.shape, B, dtype=np.int64)  # row B is the zero block
        for b, (_, p) in enumerate(columns):
            slot[p - 1, b] = b
        X = ops.concat([ops.take(base, index), ops.take(flagged, slot)], axis=-1)
        return X, lengths, u

    def input_representation(self, tape: Tape, sentence: Sentence, position: int) -> Var:
        """``n x (2 d_w + d_ch + d_le + 1)`` rows ``[x_re; x_pe; x_char; x_le; flag]``."""
        X, _, _ = self._inputs(tape, [sentence], [(0, position)])
        return X[:, 0, :]

    def encode_columns(self, tape: Tape, sentences: Sequence[Sentence],
                       columns: Sequence[tuple[int, int]]) -> tuple[Var, Var]:
        """States ``(T, B, 2 d_h)``, one encoder pass per ``(sentence index, predicate)``
        column, and the decoder lemma vectors ``(B, d'_l)``."""
        if not columns:
            raise XsrlError("encode needs at least one predicate")
        X, lengths, u = self._inputs(tape, sentences, columns)
        return self.encoder.encode(tape, X, lengths), u

    def encode(self, tape: Tape, sentence: Sentence, positions: Sequence[int]) -> Var:
        """``(n, m, 2 d_h)``: the sentence encoded once per predicate position."""
        H, _ = self.encode_columns(tape, [sentence], [(0, p) for p in positions])
        return H

    def role_weights(self, tape: Tape, u: Var) -> Var:
        """``(B, K, 4 d_h)``: row ``r`` of block ``b`` is ``relu(U [u_b; v_r])``."""
        U = tape.param("U")
        dl, K, B = self.config.d_lemma_dec, len(self.roles), u.shape[0]
        four_h = U.shape[0]
        role_part = ops.reshape(tape.param("role_emb") @ U[:, dl:].T, (1, K, four_h))
        lemma_part = ops.reshape(u @ U[:, :dl].T, (B, 1, four_h))
        return ops.relu(role_part + lemma_part)

    def column_logits(self, tape: Tape, H: Var, positions: Sequence[int], u: Var) -> Var:
        """``(T, B, K)`` role logits ``W_{j,r} . [h_pred; h_i]`` for every token and column."""
        two_h = 2 * self.config.d_h
        W = self.role_weights(tape, u)
        B = len(positions)
        h_pred = H[(np.asarray(positions) - 1, np.arange(B))]
        arg = ops.einsum("tbd,bkd->tbk", H, W[:, :, two_h:])
        pred = ops.einsum("bd,bkd->bk", h_pred, W[:, :, :two_h])
        return arg + ops.reshape(pred, (1, B, W.shape[1]))

    def instances(self, corpus: Corpus) -> list[Instance]:
        out = []
        for s_idx, sent in enumerate(corpus):
            for fr in sent.frames:
                for i in range(1, len(sent) + 1):
                    if not sent.is_labeled(i):
                        continue
                    role = fr.role_of(i)
                    gold = 0 if role is None else self.roles.stoi.get(role)
                    if gold is None:
                        raise XsrlError(f"role {role!r} missing from the role vocabulary")
                    out.append((s_idx, (fr.position, i), gold))
        return out

    def batch_loss(self, tape, batch):
        sentences = [s for s, _ in batch]
        columns = sorted({(k, key[0]) for k, (_, items) in enumerate(batch) for _, key, _ in items})
        col_of = {c: b for b, c in enumerate(columns)}
        H, u = self.encode_columns(tape, sentences, columns)
        logits = self.column_logits(tape, H, [p for _, p in columns], u)
        t_idx, b_idx, gold = [], [], []
        for k, (_, items) in enumerate(batch):
            for _, (p, i), g in items:
                t_idx.append(i - 1)
                b_idx.append(col_of[(k, p)])
                gold.append(g)
        loss, _ = ops.softmax_xent_rows(logits[(np.array(t_idx), np.array(b_idx))], np.array(gold))
        return loss

    def role_probabilities(self, sentence: Sentence, positions: Sequence[int]) -> np.ndarray:
        """``(n, m, K)`` role distribution per token and predicate."""
        tape = Tape(self.store, grad=False)
        H, u = self.encode_columns(tape, [sentence], [(0, p) for p in positions])
        return ops.softmax_np(self.column_logits(tape, H, positions, u).value)

    def tag(self, sentence: Sentence, predicates: Sequence[tuple[int, str]]) -> Sentence:
        """Fill argument structure for ``(position, sense)`` predicates; argmax per token, NULL emits nothing."""
        predicates = sorted(predicates)
        frames = []
        if predicates:
            positions = [p for p, _ in predicates]
            tape = Tape(self.store, grad=False)
            H, u = self.encode_columns(tape, [sentence], [(0, p) for p in positions])
            best = np.argmax(self.column_logits(tape, H, positions, u).value, axis=2)  # lowest id wins ties
            for b, (p, sense) in enumerate(predicates):
                args = [SemanticDependency(i + 1, self.roles.itos[r]) for i, r in enumerate(best[:, b])
                        if self.roles.itos[r] != NULL_ROLE]
                frames.append(PredicateFrame(p, sense, tuple(args)))
        return Sentence(sentence.tokens, tuple(frames), sentence.labeled_mask)


def role_scores(h_pred: np.ndarray, h_arg: np.ndarray, u_lemma: np.ndarray, U: np.ndarray,
                role_emb: np.ndarray, roles: Sequence[int] | None = None) -> np.ndarray:
    """Softmax over all roles of ``relu(U [u; v_r]) . [h_pred; h_arg]``.

    ``roles`` selects which entries of the full distribution to return.
    """
    W = np.maximum(0.0, np.concatenate([np.broadcast_to(u_lemma, (len(role_emb), len(u_lemma))), role_emb],
                                       axis=1) @ U.T)
    p = ops.softmax_np(W @ np.concatenate([h_pred, h_arg]))
    if roles is None:
        return p
    for r in roles:
        if not 0 <= r < len(p):
            raise XsrlError(f"unknown role id {r}")
    return p[list(roles)]


class SenseModel(Network):
    kind = "senses"

    def __init__(self, config, vocabs, store, pretrained_words=(), lexicon=None):
        super().__init__(config, vocabs, store, pretrained_words, lexicon)
        self.encoder = LSTMStack("sense_enc", 2 * config.d_w + config.d_ch, config.d_h, config.sense_depth)

    @classmethod
    def vocab_from(cls, corpus, config, lexicon):
        v = build_vocab(corpus, config.min_count)
        if not len(v.senses):
            raise XsrlError("no predicate senses in the training corpus")
        return {"words": v.words, "chars": v.chars, "senses": v.senses}

    def init_params(self, rng, pretrained):
        super().init_params(rng, pretrained)
        c, s = self.config, self.store
        self.encoder.init(s, rng)
        s.add("sense_W", glorot(rng, len(self.vocabs["senses"]), 2 * c.d_h))
        s.add("sense_b", np.zeros(len(self.vocabs["senses"])))

    def logits(self, tape: Tape, sentences: Sequence[Sentence], targets: Sequence[tuple[int, int]]) -> Var:
        """Sense logits for ``(sentence index, position)`` targets."""
        H, _ = self.encode_sentences(tape, sentences)
        rows = H[(np.array([p - 1 for _, p in targets]), np.array([k for k, _ in targets]))]
        return rows @ tape.param("sense_W").T + tape.param("sense_b")

    def instances(self, corpus):
        senses = self.vocabs["senses"]
        return [(k, (fr.position,), senses.id(fr.sense)) for k, s in enumerate(corpus) for fr in s.frames]

    def batch_loss(self, tape, batch):
        targets = [(k, key[0]) for k, (_, items) in enumerate(batch) for _, key, _ in items]
        gold = [g for _, items in batch for _, _, g in items]
        loss, _ = ops.softmax_xent_rows(self.logits(tape, [s for s, _ in batch], targets), np.array(gold))
        return loss

    def disambiguate(self, sentence: Sentence, positions: Sequence[int]) -> list[str]:
        """Argmax sense from the global inventory at every position; never fails on unseen words."""
        if not positions:
            return []
        for p in positions:
            if not 1 <= p <= len(sentence):
                raise XsrlError(f"predicate index {p} outside 1..{len(sentence)}")
        logits = self.logits(Tape(self.store, grad=False), [sentence], [(0, p) for p in positions]).value
        return [self.vocabs["senses"].itos[k] for k in np.argmax(logits, axis=1)]


class PredicateIdentifier(Network):
    kind = "predid"
    input_pos = True

    def __init__(self, config, vocabs, store, pretrained_words=(), lexicon=None):
        super().__init__(config, vocabs, store, pretrained_words, lexicon)
        self.encoder = LSTMStack("pid_enc", 2 * config.d_w + config.d_pos + config.d_ch, config.d_h,
                                 config.enc_depth)

    @classmethod
    def vocab_from(cls, corpus, config, lexicon):
        v = build_vocab(corpus, config.min_count)
        tags = Counter()
        for s in corpus:
            for t in s.tokens:
                if t.pos is None:
                    raise XsrlError("predicate identification needs a POS column on every token")
                tags[t.pos] += 1
        return {"words": v.words, "chars": v.chars, "pos": Vocab.from_counts(tags, 1)}

    def init_params(self, rng, pretrained):
        super().init_params(rng, pretrained)
        c, s = self.config, self.store
        s.add("pos_emb", _uniform(rng, (len(self.vocabs["pos"]), c.d_pos), c.init_scale))
        self.encoder.init(s, rng)
        s.add("pid_W", glorot(rng, 2, 2 * c.d_h))
        s.add("pid_b", np.zeros(2))

    def logits(self, tape: Tape, sentences: Sequence[Sentence]) -> Var:
        """``(T, S, 2)`` not-predicate / predicate logits."""
        H, _ = self.encode_sentences(tape, sentences)
        return H @ tape.param("pid_W").T + tape.param("pid_b")

    def instances(self, corpus):
        out = []
        for k, s in enumerate(corpus):
            preds = set(s.predicate_positions)
            out.extend((k, (i,), int(i in preds)) for i in range(1, len(s) + 1))
        return out

    def batch_loss(self, tape, batch):
        logits = self.logits(tape, [s for s, _ in batch])
        t_idx = [key[0] - 1 for _, items in batch for _, key, _ in items]
        b_idx = [k for k, (_, items) in enumerate(batch) for _ in items]
        gold = [g for _, items in batch for _, _, g in items]
        loss, _ = ops.softmax_xent_rows(logits[(np.array(t_idx), np.array(b_idx))], np.array(gold))
        return loss

    def identify(self, sentence: Sentence) -> list[int]:
        """Positions whose predicate probability is strictly above 0.5."""
        p = ops.softmax_np(self.logits(Tape(self.store, grad=False), [sentence]).value[:, 0, :])
        return [i + 1 for i in range(len(sentence)) if p[i, 1] > 0.5]


MODELS = {cls.kind: cls for cls in (ArgumentModel, SenseModel, PredicateIdentifier)}
