"""
Experiments
Stability scenarios, spectrum surveys, norm probes and the decay audit
"""
