"""Dense float64 tensors with reverse-mode differentiation, LSTM stacks,
softmax cross-entropy, Adam and a finite-difference checker."""

from xsrl.neural.autodiff import Tape, Var, backward
from xsrl.neural.gradcheck import grad_check, gradient_errors
from xsrl.neural.lstm import LSTMStack, bilstm_encode, lstm_layer, lstm_step
from xsrl.neural.ops import softmax_xent, softmax_xent_rows
from xsrl.neural.optim import ParamStore, adam_step

__all__ = [
    "LSTMStack", "ParamStore", "Tape", "Var", "adam_step", "backward", "bilstm_encode",
    "grad_check", "gradient_errors", "lstm_layer", "lstm_step", "softmax_xent", "softmax_xent_rows",
]
