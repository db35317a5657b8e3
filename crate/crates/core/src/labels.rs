//! Ground-truth labels attached to recordings and feature series.

use std::fmt;
use std::str::FromStr;

/// The three reading materials of the recording sessions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Document {
    Comic,
    Newspaper,
    Textbook,
}

impl Document {
    pub const ALL: [Document; 3] = [Document::Comic, Document::Newspaper, Document::Textbook];

    pub fn as_str(self) -> &'static str {
        match self {
            Document::Comic => "comic",
            Document::Newspaper => "newspaper",
            Document::Textbook => "textbook",
        }
    }

    /// Dense class index, used as the label for document classification.
    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Document {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Document {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "comic" => Ok(Document::Comic),
            "newspaper" => Ok(Document::Newspaper),
            "textbook" => Ok(Document::Textbook),
            other => Err(format!("unknown document `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Gender {
    Female,
    Male,
}

impl Gender {
    pub const ALL: [Gender; 2] = [Gender::Female, Gender::Male];

    pub fn as_str(self) -> &'static str {
        match self {
            Gender::Female => "female",
            Gender::Male => "male",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Gender {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Gender {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "female" => Ok(Gender::Female),
            "male" => Ok(Gender::Male),
            other => Err(format!("unknown gender `{other}`")),
        }
    }
}
