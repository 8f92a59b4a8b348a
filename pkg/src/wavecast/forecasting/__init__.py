"""Lagged-dependent-variable forecasters with direct and autoregressive prediction."""
from .design import DesignMatrix, LagSpec, build_design, gather_features, valid_origins
from .gbt import GbtModel, fit_gbt
from .linear import LinearModel, RankDeficiencyWarning, fit_ols
from .persistence import dumps, load_model, loads, save_model
from .rollout import ForecastResult, evaluate, predict_direct, rollout

__all__ = [
    "DesignMatrix",
    "ForecastResult",
    "GbtModel",
    "LagSpec",
    "LinearModel",
    "RankDeficiencyWarning",
    "build_design",
    "dumps",
    "evaluate",
    "fit_gbt",
    "fit_ols",
    "gather_features",
    "load_model",
    "loads",
    "predict_direct",
    "rollout",
    "save_model",
    "valid_origins",
]
