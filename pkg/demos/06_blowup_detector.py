"""Termination semantics: run forever or watch the sup norm escape.

The simulator mirrors the extensibility dichotomy of the continuous
problem: a run either reaches its horizon or stops with BlowupDetected
when |u|_inf crosses the configured threshold (or dt collapses below
dt_min).  The detector reports the discrete trajectory's escape; it never
claims the PDE itself blows up.

Two demonstrations: the threshold contract on a degenerate configuration,
and an uncovered-regime run that nevertheless stays tame at desk scale.
"""

from kschemo import ModelParams, Regime, classify_regime
from kschemo.config import parse_config, run_from_config

print("1. threshold contract: equilibrium level 2 against threshold 1")
degenerate = """
model.a = 4.0
model.alpha = 2.0
model.beta = 2.0
ic.u = constant
ic.u_value = 2.0
ic.v = equal_u
stepper.blowup_linf_threshold = 1.0
run.t_end = 1.0
grid.cells_x = 64
"""
cfg = parse_config(text=degenerate)
result = run_from_config(cfg, output_dir=None)
print(f"   termination: {result.termination} at t = {result.state.t} (step 0)")
print("   (CLI exit code 3 signals the same outcome)")

print()
print("2. outside both regions the theory is silent; the run may still settle")
uncovered = """
model.chi = 3.0
model.alpha = 1.5
model.beta = 1.0
grid.dim = 1
grid.cells_x = 128
ic.u = bump
ic.u_mass = 3.0
ic.u_width = 0.1
run.t_end = 10.0
run.sample_interval = 0.25
"""
cfg = parse_config(text=uncovered)
regime = classify_regime(cfg.model, 1)
assert regime is Regime.UNCOVERED
print(f"   (alpha, beta, n) = (1.5, 1, 1) classifies as {regime}")
result = run_from_config(cfg, output_dir=None)
linf = result.series.column("linf_u")
print(f"   termination: {result.termination}; |u|_inf went {linf[0]:.3g} -> {linf[-1]:.3g}")
print("   no conclusion follows either way: Uncovered means exactly that")
