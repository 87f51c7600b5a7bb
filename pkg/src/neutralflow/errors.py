"""Exception types shared across the package."""


class NeutralflowError(Exception):
    pass


class NetworkError(NeutralflowError):
    """Invalid graph data: bad indices, weight placement, Kirchhoff violation,
    or (when required) disconnectedness."""


class ConfigError(NeutralflowError):
    """Configuration file failed validation.  Carries a list of
    (json_path, message) pairs."""

    def __init__(self, issues):
        self.issues = list(issues)
        super().__init__("; ".join(f"{p}: {m}" for p, m in self.issues))


class GapViolation(NeutralflowError):
    """A delay atom sits closer to zero than the time step allows."""


class CFLViolation(NeutralflowError):
    """Time step incompatible with edge travel times."""


class CharacteristicSingularity(NeutralflowError):
    """det(I - char_matrix(mu)) is numerically zero: mu is (near) a boundary
    characteristic root and the perturbed resolvent does not exist."""


class NeutralSingularity(NeutralflowError):
    """det(I - neutral symbol at mu) is numerically zero."""


class DelayCharacteristicSingularity(NeutralflowError):
    """The assembled neutral frequency matrix is numerically singular."""


class ContourTooClose(NeutralflowError):
    """A root lies (numerically) on the counting contour after retries."""


class RootPolishDiverged(NeutralflowError):
    """Newton polishing failed to converge."""


class AllSamplesSingular(NeutralflowError):
    """Every frequency sample hit a singularity; nothing to aggregate."""
