//! Harnack quantities, bound monitors, evolution-identity residuals and
//! integrated path inequalities.

mod identity;
mod monitor;
mod path;
mod quantity;

pub use identity::{identity_residual, observed_orders, residual_max_norm, IdentityId, IdentityResidual};
pub use monitor::{
    choose_type_one_d, monitor, HarnackReport, MonitorOptions, MonitorRecord, SideCheck,
    Tolerance, TypeOneFamily, Verdict, TYPE_ONE_MAX_D,
};
pub use path::{path_harnack_check, PathHarnackCheck, PathTheorem};
pub use quantity::{li_yau_form, HarnackQuantity, QuantityKind};
