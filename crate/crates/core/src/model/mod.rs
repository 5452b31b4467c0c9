//! In-memory architecture models, stereotype profiles and views.

mod arch;
mod path;
mod profile;
mod view;

pub use arch::{
    apply_stereotype, AppliedStereotype, ApplyError, ArchConnector, ArchElement, ArchModel, ArchPort,
    AttrBinding, Direction, PortRef, Stereotyped,
};
pub use path::{is_identifier, is_valid_name, join_names, quote_name, quote_string, ElementPath};
pub use profile::{
    check_hierarchy, format_real, resolve_effective, AttrValue, AttributeDef, BaseKind, Dal, EffectiveAttr,
    EffectiveStereotype, ModelKind, Profile, ProfileError, ProfileSet, Stereotype, ValueKind,
};
pub use view::{build_view, ViewEntry, ViewError, ViewKind, ViewTree};

use serde::{Deserialize, Serialize};

/// A function realized by a physical element.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Allocation {
    pub functional: ElementPath,
    pub physical: ElementPath,
}
