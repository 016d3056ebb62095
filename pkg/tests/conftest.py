import numpy as np

from reliakit import PairedSample


def make_sample(x1, x2, measure_id="m"):
    return PairedSample(
        measure_id=measure_id,
        x1=np.asarray(x1, dtype=np.float64),
        x2=np.asarray(x2, dtype=np.float64),
    )


def gauss_pairs(rng, n, rho, measure_id="m"):
    """PairedSample drawn from a bivariate standard normal with correlation rho."""
    z1 = rng.standard_normal(n)
    z2 = rng.standard_normal(n)
    return make_sample(z1, rho * z1 + np.sqrt(1.0 - rho * rho) * z2, measure_id)
