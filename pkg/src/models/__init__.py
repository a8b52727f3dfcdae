from src.models.operators import (
    Boundary,
    FrequencyVector,
    Potential,
    SpectralData,
    TruncatedOperator,
    VelocityObservable,
)
from src.models.results import (
    CesaroResult,
    CocycleTrace,
    CommutatorCheck,
    DTheta,
    DualDiagonal,
    FermionFrame,
    Gap,
    GapReport,
    IdsTable,
    LightConeGrid,
    ManyBodyOperator,
    QNormCurve,
    TransferMatrix,
    VelocityFit,
)
