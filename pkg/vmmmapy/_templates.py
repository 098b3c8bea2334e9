from string import Template

CONFIG = Template(
    """\
{
  "model": {
    "kernel_g": {"family": "supou", "params": {"rate": 1.0}},
    "volatility": {
      "kind": "levy",
      "kernel_h": {"family": "supou", "params": {"rate": 2.0}},
      "basis": {"family": "gamma", "params": {"shape": 2.0, "rate": 2.0}}
    }
  },
  "grid": {"origin": [0.0], "step": [0.1], "count": [64], "tolerance": 1e-6},
  "run": {
    "n_reps": $n_reps,
    "master_seed": $master_seed,
    "theta_grid": [0.0, 0.5, 1.0, 2.0],
    "lags": [[0.5], [1.0], [2.0]],
    "laplace_theta": [0.5, 1.0],
    "points": [[0.0], [0.5]],
    "joint_thetas": [[1.0, 1.0], [1.0, -1.0], [0.5, 2.0]],
    "hurst": [0.5],
    "workers": 1,
    "save_fields": false
  },
  "output": {"directory": "results"},
  "design": {
    "covariance": {"kind": "gaussian", "scale": 1.0},
    "lag_step": 0.05,
    "lag_count": 401,
    "root": "even"
  }
}
"""
)
