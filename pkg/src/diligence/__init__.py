"""Due-diligence pipeline engine.

A workflow DAG engine plus the domain modules it orchestrates: company
intake, market-intelligence agents, registry document extraction, a
three-state financial fallback, and deterministic HTML report rendering.
"""

__version__ = "0.1.0"
