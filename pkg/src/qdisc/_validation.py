"""Input validation helpers shared by the estimators and functional API."""

import numpy as np
from sklearn.utils.validation import check_array


def check_binary_features(X) -> np.ndarray:
    """Return ``X`` as a 2-D uint8 array, rejecting anything that is not 0/1."""
    X = check_array(X, dtype=None, ensure_min_samples=0, ensure_min_features=0)
    if X.size and not _is_binary(X):
        raise ValueError("features must be binary (0/1)")
    return X.astype(np.uint8, copy=False)


def check_binary_labels(y, n_samples: int) -> np.ndarray:
    y = np.asarray(y).reshape(-1)
    if y.size != n_samples:
        raise ValueError(f"got {n_samples} feature rows but {y.size} labels")
    if y.size and not _is_binary(y):
        raise ValueError("labels must be 0 or 1")
    return y.astype(np.int8, copy=False)


def _is_binary(a: np.ndarray) -> bool:
    if a.dtype == np.bool_:
        return True
    if np.issubdtype(a.dtype, np.integer):
        return bool(a.min() >= 0 and a.max() <= 1)
    try:
        return bool(((a == 0) | (a == 1)).all())
    except TypeError:
        return False
