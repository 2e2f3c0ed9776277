"""Exception hierarchy shared by all modules."""


class BimodalError(Exception):
    """Base class for every error raised by this package."""


class DomainError(BimodalError, ValueError):
    """An argument lies outside the domain of a function."""


class OverDeliveryError(BimodalError):
    """Trucks deliver more parcels to a node than it demands."""

    def __init__(self, node, excess):
        self.node = node
        self.excess = excess
        super().__init__(f"over-delivery at node {node}: trucks exceed demand by {excess:.6g} parcels/h")


class DegenerateSamplesError(BimodalError):
    """Latency samples cannot identify a plane (rank-deficient design)."""


class NonPhysicalPlaneError(BimodalError):
    """A fitted latency plane has a non-positive component."""


class PathLimitError(BimodalError):
    """Path enumeration exceeded its configured limit."""


class InfeasibleError(BimodalError):
    """The routing problem has no feasible flow."""


class ScenarioError(BimodalError):
    """A scenario document is malformed or describes an invalid network."""
