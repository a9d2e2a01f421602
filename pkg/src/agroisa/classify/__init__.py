"""Classifiers trained on the questionnaire-derived datasets."""

from .base import Model, load_model, save_model
from .boosting import BoostedStumpsModel, train_adaboost
from .forest import ForestModel, train_forest
from .mlp import PerceptronModel, loss_and_grad, train_mlp
from .naive_bayes import NaiveBayesModel, train_naive_bayes
from .ripper import RuleSetModel, format_rules, train_ripper
from .tree import TreeModel, train_tree

__all__ = [
    "Model",
    "load_model",
    "save_model",
    "train_naive_bayes",
    "train_tree",
    "train_forest",
    "train_adaboost",
    "train_ripper",
    "train_mlp",
    "loss_and_grad",
    "format_rules",
    "NaiveBayesModel",
    "TreeModel",
    "ForestModel",
    "BoostedStumpsModel",
    "RuleSetModel",
    "PerceptronModel",
]
