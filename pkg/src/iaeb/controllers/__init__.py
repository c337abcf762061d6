from .accel import AccelerationController, PiState, pi_accel_step, sat
from .baselines import (HoldingBaseline, KapseParams, KimParams, baseline_cho_step,
                        baseline_kapse_step, baseline_kim_step, kim_from_risk)
from .commands import IDLE, NO_REQUEST, AebCommand, Source, merge
from .commercial import (TTC_TRIGGER, ActivationParams, CommercialFsm, FsmState,
                         activation_check, commercial_step)
from .type_a import TypeAController, type_a_step
from .type_b import TypeBController, TypeBParams, TypeBSolution, type_b_solve, type_b_step
