//! Event labels: opaque alphabet symbols and memory-access records.

use std::fmt;

/// Synchronization tag of a load.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum LoadTag {
    None,
    Acquire,
}

/// Synchronization tag of a store.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum StoreTag {
    None,
    Release,
}

/// Register names. Kept in a separate newtype so that the register and
/// address name spaces stay disjoint by construction.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Reg(pub String);

/// Memory location (address) names.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Addr(pub String);

/// What an event does.
///
/// `Opaque` covers plain alphabet symbols compared by token equality.
/// `Load` and `Store` carry the shared-memory access records; stored values
/// are restricted to one bit.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Label {
    Opaque(String),
    Load { tag: LoadTag, reg: Reg, addr: Addr },
    Store { tag: StoreTag, addr: Addr, bit: bool },
}

impl Label {
    pub fn opaque(token: impl Into<String>) -> Self {
        Label::Opaque(token.into())
    }

    pub fn load(tag: LoadTag, reg: impl Into<String>, addr: impl Into<String>) -> Self {
        Label::Load {
            tag,
            reg: Reg(reg.into()),
            addr: Addr(addr.into()),
        }
    }

    pub fn store(tag: StoreTag, addr: impl Into<String>, bit: bool) -> Self {
        Label::Store {
            tag,
            addr: Addr(addr.into()),
            bit,
        }
    }

    pub fn is_load(&self) -> bool {
        matches!(self, Label::Load { .. })
    }

    pub fn is_store(&self) -> bool {
        matches!(self, Label::Store { .. })
    }

    pub fn is_memory_access(&self) -> bool {
        !matches!(self, Label::Opaque(_))
    }

    pub fn is_acquire(&self) -> bool {
        matches!(
            self,
            Label::Load {
                tag: LoadTag::Acquire,
                ..
            }
        )
    }

    pub fn is_release(&self) -> bool {
        matches!(
            self,
            Label::Store {
                tag: StoreTag::Release,
                ..
            }
        )
    }

    /// True for loads and stores tagged `none`.
    pub fn is_non_synchronizing(&self) -> bool {
        matches!(
            self,
            Label::Load {
                tag: LoadTag::None,
                ..
            } | Label::Store {
                tag: StoreTag::None,
                ..
            }
        )
    }

    /// The accessed memory location, if this is a memory access.
    pub fn addr(&self) -> Option<&Addr> {
        match self {
            Label::Opaque(_) => None,
            Label::Load { addr, .. } | Label::Store { addr, .. } => Some(addr),
        }
    }

    pub fn store_bit(&self) -> Option<bool> {
        match self {
            Label::Store { bit, .. } => Some(*bit),
            _ => None,
        }
    }
}

impl fmt::Display for LoadTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LoadTag::None => write!(f, "none"),
            LoadTag::Acquire => write!(f, "acquire"),
        }
    }
}

impl fmt::Display for StoreTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StoreTag::None => write!(f, "none"),
            StoreTag::Release => write!(f, "release"),
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Opaque(t) => write!(f, "{t}"),
            Label::Load { tag, reg, addr } => write!(f, "{}:=[{}]_{}", reg.0, addr.0, tag),
            Label::Store { tag, addr, bit } => {
                write!(f, "[{}]_{}:={}", addr.0, tag, u8::from(*bit))
            }
        }
    }
}
