//! Roll-call vote atoms.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// A single roll-call choice.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Vote {
    For,
    Against,
    Abstain,
    Obstruction,
    Absent,
}

impl Vote {
    pub const ALL: [Vote; 5] = [
        Vote::For,
        Vote::Against,
        Vote::Abstain,
        Vote::Obstruction,
        Vote::Absent,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Vote::For => "FOR",
            Vote::Against => "AGAINST",
            Vote::Abstain => "ABSTAIN",
            Vote::Obstruction => "OBSTRUCTION",
            Vote::Absent => "ABSENT",
        }
    }

    /// Token written by the CSV/JSON emitters (Chamber of Deputies spelling).
    pub fn portuguese(self) -> &'static str {
        match self {
            Vote::For => "Sim",
            Vote::Against => "Não",
            Vote::Abstain => "Abstenção",
            Vote::Obstruction => "Obstrução",
            Vote::Absent => "Ausência",
        }
    }
}

impl fmt::Display for Vote {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UnknownVoteToken(pub String);

impl fmt::Display for UnknownVoteToken {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "unknown vote token `{}`", self.0)
    }
}

impl std::error::Error for UnknownVoteToken {}

impl FromStr for Vote {
    type Err = UnknownVoteToken;

    /// Case-insensitive; accepts English names and the accented or
    /// unaccented Portuguese tokens used by the upstream sources.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let token = s.trim().to_lowercase();
        let vote = match token.as_str() {
            "for" | "sim" | "yes" => Vote::For,
            "against" | "não" | "nao" | "no" => Vote::Against,
            "abstain" | "abstention" | "abstenção" | "abstencao" => Vote::Abstain,
            "obstruction" | "filibuster" | "obstrução" | "obstrucao" => Vote::Obstruction,
            "absent" | "ausência" | "ausencia" | "ausente" => Vote::Absent,
            _ => return Err(UnknownVoteToken(s.to_string())),
        };
        Ok(vote)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Deputy {
    pub id: String,
    pub name: String,
    pub party: String,
    pub state: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VoteRecord {
    pub proposition_id: String,
    pub deputy_id: String,
    pub vote: Vote,
}
