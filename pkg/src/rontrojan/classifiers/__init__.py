"""From-scratch classifiers: KNN, RBF SVM (SMO), Gaussian naive Bayes, voting ensembles.

All of them expect standardized features and use -1 (golden) / +1 (Trojan) labels.
"""

from rontrojan.classifiers.base import TieBreak, euclidean_distance
from rontrojan.classifiers.ensemble import (
    STANDARD_COMBINATIONS,
    TrainedEnsemble,
    build_ensemble,
    ensemble_classify,
)
from rontrojan.classifiers.gnb import TrainedGnb, gnb_classify, gnb_fit, gnb_train
from rontrojan.classifiers.knn import TrainedKnn, knn_classify, knn_fit, knn_train
from rontrojan.classifiers.serialize import dumps_model, load_model, loads_model, save_model
from rontrojan.classifiers.svm import (
    TrainedSvm,
    balanced_class_weights,
    rbf_kernel,
    svm_classify,
    svm_decision,
    svm_fit,
    svm_train,
)

__all__ = [
    "STANDARD_COMBINATIONS",
    "TieBreak",
    "TrainedEnsemble",
    "TrainedGnb",
    "TrainedKnn",
    "TrainedSvm",
    "balanced_class_weights",
    "build_ensemble",
    "dumps_model",
    "ensemble_classify",
    "euclidean_distance",
    "gnb_classify",
    "gnb_fit",
    "gnb_train",
    "knn_classify",
    "knn_fit",
    "knn_train",
    "load_model",
    "loads_model",
    "rbf_kernel",
    "save_model",
    "svm_classify",
    "svm_decision",
    "svm_fit",
    "svm_train",
]
