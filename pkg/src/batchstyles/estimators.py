"""scikit-learn compatible wrappers around the style augmentations.

Both transformers are stateless apart from their generator: ``fit`` only
records the input geometry and seeds the stream, so they can sit inside a
``Pipeline`` or be cloned with ``sklearn.base.clone``.
"""

from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .rng import SplitMix64
from .style import DEFAULT_RATIO_RANGE, batch_styles_standardize, fourier_augment
from .validation import check_image_batch, check_ratio_range


class _StyleTransformer(TransformerMixin, BaseEstimator):

    def fit(self, X, y=None):
        X = check_image_batch(X)
        check_ratio_range(self.r_min, self.r_max)
        self.n_channels_in_ = X.shape[1]
        self.image_shape_ = X.shape[2:]
        self.rng_ = SplitMix64(self.seed)
        return self

    def _check_input(self, X):
        check_is_fitted(self, "rng_")
        X = check_image_batch(X)
        if X.shape[1] != self.n_channels_in_ or X.shape[2:] != self.image_shape_:
            raise ValueError(
                f"X has shape {X.shape[1:]}, expected "
                f"({self.n_channels_in_}, {self.image_shape_[0]}, {self.image_shape_[1]})"
            )
        return X


class FourierAugmentation(_StyleTransformer):
    """Per-sample Fourier augmentation (random style per image).

    Parameters
    ----------
    r_min, r_max : float
        Range of the substituted-block ratio.
    seed : int
        Seed of the internal splitmix64 stream; reset on every ``fit``.
    """

    def __init__(self, r_min=DEFAULT_RATIO_RANGE[0], r_max=DEFAULT_RATIO_RANGE[1], seed=0):
        self.r_min = r_min
        self.r_max = r_max
        self.seed = seed

    def transform(self, X):
        X = self._check_input(X)
        return fourier_augment(X, (self.r_min, self.r_max), self.rng_)


class BatchStylesStandardization(_StyleTransformer):
    """Batch styles standardization producing ``n_views`` views.

    ``transform`` returns an ``(N, n_views, C, H, W)`` array.
    """

    def __init__(self, n_views=2, r_min=DEFAULT_RATIO_RANGE[0], r_max=DEFAULT_RATIO_RANGE[1],
                 seed=0):
        self.n_views = n_views
        self.r_min = r_min
        self.r_max = r_max
        self.seed = seed

    def fit(self, X, y=None):
        super().fit(X, y)
        if not 1 <= self.n_views <= len(X):
            raise ValueError(f"n_views must lie in [1, {len(X)}], got {self.n_views}")
        return self

    def transform(self, X):
        X = self._check_input(X)
        return batch_styles_standardize(X, self.n_views, (self.r_min, self.r_max), self.rng_)
