"""Learned graph augmentation for contrastive representation learning."""

from ._augcl import (
    CheckpointError,
    ConfigError,
    ContractViolation,
    Dataset,
    IngestionError,
    Model,
    config_keys,
    default_config,
    linear_probe,
    load_dataset,
    load_model,
    train,
)

__all__ = [
    "CheckpointError",
    "ConfigError",
    "ContractViolation",
    "Dataset",
    "IngestionError",
    "Model",
    "config_keys",
    "default_config",
    "linear_probe",
    "load_dataset",
    "load_model",
    "train",
]
