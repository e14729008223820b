"""Value-oriented wind forecasting with a dispatch-cost loss derived by multi-parametric LP."""

from .dispatch import CANONICAL, DEFICIT_DEAR, DispatchSpec, canonical_spec, operation_cost, perturb_spec
from .errors import DegenerateAtPoint, MplossError
from .loss_synth import PiecewiseLoss, loss_eval, loss_grad_yhat, loss_slice_1d, synthesize_loss
from .train_eval import MlpModel, TrainConfig, evaluate, train_diffopt, train_quality, train_value

__all__ = [
    "CANONICAL", "DEFICIT_DEAR", "DispatchSpec", "canonical_spec", "operation_cost", "perturb_spec",
    "DegenerateAtPoint", "MplossError",
    "PiecewiseLoss", "loss_eval", "loss_grad_yhat", "loss_slice_1d", "synthesize_loss",
    "MlpModel", "TrainConfig", "evaluate", "train_diffopt", "train_quality", "train_value",
]
