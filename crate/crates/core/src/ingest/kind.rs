use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::Error;

/// How a third party was contacted. `Bounced` only ever labels edges.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InteractionKind {
    Script,
    Media,
    Iframe,
    Other,
    Bounced,
}

impl InteractionKind {
    pub const NODE_KINDS: [InteractionKind; 4] = [
        InteractionKind::Script,
        InteractionKind::Media,
        InteractionKind::Iframe,
        InteractionKind::Other,
    ];

    pub fn is_node_kind(self) -> bool {
        self != InteractionKind::Bounced
    }

    pub fn as_str(self) -> &'static str {
        match self {
            InteractionKind::Script => "script",
            InteractionKind::Media => "media",
            InteractionKind::Iframe => "iframe",
            InteractionKind::Other => "other",
            InteractionKind::Bounced => "bounced",
        }
    }

    /// Small integer code used as the categorical engineered feature.
    pub fn code(self) -> u8 {
        match self {
            InteractionKind::Script => 0,
            InteractionKind::Media => 1,
            InteractionKind::Iframe => 2,
            InteractionKind::Other => 3,
            InteractionKind::Bounced => 4,
        }
    }
}

impl fmt::Display for InteractionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for InteractionKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "script" => Ok(InteractionKind::Script),
            "media" => Ok(InteractionKind::Media),
            "iframe" => Ok(InteractionKind::Iframe),
            "other" => Ok(InteractionKind::Other),
            "bounced" => Ok(InteractionKind::Bounced),
            _ => Err(Error::InvalidArgument(format!("interaction kind {s:?}"))),
        }
    }
}

/// Maps a capture's resource type (or, failing that, the response MIME type)
/// onto one of the four node kinds.
pub fn classify_interaction(resource_type: Option<&str>, mime: Option<&str>) -> InteractionKind {
    match resource_type.map(str::trim).filter(|r| !r.is_empty()) {
        Some(rt) => match rt.to_ascii_lowercase().as_str() {
            "script" => InteractionKind::Script,
            "image" | "media" | "font" => InteractionKind::Media,
            "document" | "subdocument" => InteractionKind::Iframe,
            _ => InteractionKind::Other,
        },
        None => {
            let mime = mime.unwrap_or("").to_ascii_lowercase();
            if mime.starts_with("image/") || mime.starts_with("video/") || mime.starts_with("audio/") {
                InteractionKind::Media
            } else if mime.contains("javascript") {
                InteractionKind::Script
            } else if mime.starts_with("text/html") {
                InteractionKind::Iframe
            } else {
                InteractionKind::Other
            }
        }
    }
}
