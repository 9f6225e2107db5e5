from .joint import InducedJoint, induced_joint, joint_for_kernel
from .tilted import TiltedTable, tilted_information
from .decomposition import (
    DispersionReport,
    IotaSplitReport,
    MIIdentityReport,
    dispersion_report,
    iota_split_check,
    mi_identity_check,
)
from .iid import IIDCounterpartReport, iid_counterpart_report
from .pipeline import DispersionResult, dispersion_at
