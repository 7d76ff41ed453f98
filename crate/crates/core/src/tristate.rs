use std::fmt;
use std::ops::Not;

/// Kleene three-valued logic: `Unknown` is absorbed by a decisive operand.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TriState {
    Yes,
    No,
    Unknown,
}

impl TriState {
    pub fn from_bool(b: bool) -> Self {
        if b {
            TriState::Yes
        } else {
            TriState::No
        }
    }

    pub fn and(self, other: TriState) -> TriState {
        use TriState::*;
        match (self, other) {
            (No, _) | (_, No) => No,
            (Yes, Yes) => Yes,
            _ => Unknown,
        }
    }

    pub fn or(self, other: TriState) -> TriState {
        use TriState::*;
        match (self, other) {
            (Yes, _) | (_, Yes) => Yes,
            (No, No) => No,
            _ => Unknown,
        }
    }

    pub fn is_yes(self) -> bool {
        self == TriState::Yes
    }

    pub fn is_no(self) -> bool {
        self == TriState::No
    }

    pub fn is_known(self) -> bool {
        self != TriState::Unknown
    }

    pub fn known(self) -> Option<bool> {
        match self {
            TriState::Yes => Some(true),
            TriState::No => Some(false),
            TriState::Unknown => None,
        }
    }

    /// `Unknown` unless both agree; a conclusive value wins over `Unknown`.
    /// Returns `None` on a conclusive disagreement.
    pub fn reconcile(self, other: TriState) -> Option<TriState> {
        match (self, other) {
            (a, b) if a == b => Some(a),
            (TriState::Unknown, b) => Some(b),
            (a, TriState::Unknown) => Some(a),
            _ => None,
        }
    }

    pub fn all(items: impl IntoIterator<Item = TriState>) -> TriState {
        items.into_iter().fold(TriState::Yes, TriState::and)
    }

    pub fn any(items: impl IntoIterator<Item = TriState>) -> TriState {
        items.into_iter().fold(TriState::No, TriState::or)
    }
}

impl Not for TriState {
    type Output = TriState;

    fn not(self) -> TriState {
        match self {
            TriState::Yes => TriState::No,
            TriState::No => TriState::Yes,
            TriState::Unknown => TriState::Unknown,
        }
    }
}

impl From<bool> for TriState {
    fn from(b: bool) -> Self {
        TriState::from_bool(b)
    }
}

impl fmt::Display for TriState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TriState::Yes => "yes",
            TriState::No => "no",
            TriState::Unknown => "unknown",
        })
    }
}
