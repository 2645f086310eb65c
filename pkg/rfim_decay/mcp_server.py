"""FastMCP server instance and tool registration."""

# Tool modules import ``mcp`` explicitly; nothing is re-exported.
__all__: list[str] = []

from mcp.server.fastmcp import FastMCP

mcp = FastMCP(
    "RFIM Decay",
    instructions=(
        "Exact and Monte Carlo numerics for the 2D random field Ising model: quenched observables, "
        "boundary-influence gaps, spin cumulants, the lemma check suite and the decay sweep."
    ),
    json_response=True,
)

# Import tool modules to trigger @mcp.tool() registration
from .tools.combinatory import checks as _combinatory_checks  # noqa: E402, F401
from .tools.combinatory import experiments as _combinatory_experiments  # noqa: E402, F401
from .tools.simple import montecarlo as _montecarlo  # noqa: E402, F401
from .tools.simple import observables as _observables  # noqa: E402, F401
