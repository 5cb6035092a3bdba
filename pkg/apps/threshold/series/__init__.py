from .power_series import (
    Series,
    add,
    divide_by_kappa,
    inv,
    mu_series,
    mul,
    pow_series,
    ray_resolvent_entry_series,
    sqrt_one_plus,
)

__all__ = [
    "Series",
    "add",
    "divide_by_kappa",
    "inv",
    "mu_series",
    "mul",
    "pow_series",
    "ray_resolvent_entry_series",
    "sqrt_one_plus",
]
