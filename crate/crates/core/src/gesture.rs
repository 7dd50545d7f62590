use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Number of gesture classes in the dataset.
pub const CLASS_COUNT: usize = 5;

/// The five static hand gestures. Class indices follow declaration order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Gesture {
    Pinky,
    Elle,
    Yo,
    Index,
    Thumb,
}

impl Gesture {
    pub const ALL: [Gesture; CLASS_COUNT] = [
        Gesture::Pinky,
        Gesture::Elle,
        Gesture::Yo,
        Gesture::Index,
        Gesture::Thumb,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(index: usize) -> Option<Gesture> {
        Self::ALL.get(index).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            Gesture::Pinky => "pinky",
            Gesture::Elle => "elle",
            Gesture::Yo => "yo",
            Gesture::Index => "index",
            Gesture::Thumb => "thumb",
        }
    }
}

impl fmt::Display for Gesture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown gesture label `{0}` (expected pinky, elle, yo, index or thumb)")]
pub struct UnknownGesture(pub String);

impl FromStr for Gesture {
    type Err = UnknownGesture;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Gesture::ALL
            .into_iter()
            .find(|g| g.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| UnknownGesture(s.to_string()))
    }
}

impl TryFrom<String> for Gesture {
    type Error = UnknownGesture;

    fn try_from(value: String) -> Result<Self, Self::Error> {
        value.parse()
    }
}

impl From<Gesture> for String {
    fn from(g: Gesture) -> String {
        g.name().to_string()
    }
}
