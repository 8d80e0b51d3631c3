//! JSON input formats. Rationals are strings such as `"3/2"` (integers are
//! also accepted) so that exact values survive serialization.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extremal::SetFamily;
use crate::geometry::SpaceDescriptor;
use crate::rational::Rational;
use crate::signed_set::{SignedSet, SignedSetJson};
use crate::verifier::StarInstance;

/// `{"space": {"kind":"z","n":3}, "points": [["3/2","-1/2","-1/2","-1/2"], ...]}`,
/// with an optional `"center"` defaulting to the origin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StarInput {
    pub space: SpaceDescriptor,
    pub points: Vec<Vec<Rational>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center: Option<Vec<Rational>>,
}

impl StarInput {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("star input: {e}")))
    }

    pub fn instance(&self) -> Result<StarInstance> {
        let center = self.center.clone().unwrap_or_else(|| vec![Rational::zero(); self.space.ambient()]);
        StarInstance::from_points(self.space.clone(), center, &self.points)
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum PointsRepr {
    Bare(Vec<Vec<Rational>>),
    Wrapped { points: Vec<Vec<Rational>> },
}

/// A bare array of points, or any object with a `"points"` field.
pub fn parse_points(text: &str) -> Result<Vec<Vec<Rational>>> {
    match serde_json::from_str(text) {
        Ok(PointsRepr::Bare(p)) | Ok(PointsRepr::Wrapped { points: p }) => Ok(p),
        Err(e) => Err(Error::Parse(format!("points: {e}"))),
    }
}

/// `{"m": 4, "sets": [{"pos":[1],"neg":[2,3]}, ...]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignedSetsInput {
    pub m: usize,
    pub sets: Vec<SignedSetJson>,
}

impl SignedSetsInput {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("signed sets: {e}")))
    }

    pub fn signed_sets(&self) -> Result<Vec<SignedSet>> {
        self.sets.iter().map(|s| s.to_signed(self.m)).collect()
    }

    pub fn from_signed(sets: &[SignedSet]) -> Self {
        SignedSetsInput {
            m: sets.first().map_or(0, SignedSet::ground),
            sets: sets.iter().map(SignedSetJson::from).collect(),
        }
    }
}

/// `{"m": 4, "sets": [[1,2],[1,3]]}` with 1-based members.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FamilyInput {
    pub m: usize,
    pub sets: Vec<Vec<usize>>,
}

impl FamilyInput {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("set family: {e}")))
    }

    pub fn family(&self) -> Result<SetFamily> {
        SetFamily::from_index_lists(&self.sets, self.m)
    }
}

/// Exact rationals as strings, for output.
pub fn points_to_strings(points: &[Vec<Rational>]) -> Vec<Vec<String>> {
    points.iter().map(|p| p.iter().map(Rational::to_string).collect()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    #[test]
    fn star_input_round_trip() {
        let text = r#"{"space":{"kind":"z","n":3},"points":[["3/2","-1/2","-1/2","-1/2"],[0,1,-1,0]]}"#;
        let s = StarInput::from_json(text).unwrap();
        assert_eq!(s.space, SpaceDescriptor::ZNorm(3));
        assert_eq!(s.points[0][0], q(3, 2));
        assert_eq!(s.points[1][1], q(1, 1));
        let again = StarInput::from_json(&serde_json::to_string(&s).unwrap()).unwrap();
        assert_eq!(again, s);
        assert_eq!(s.instance().unwrap().k(), 2);
    }

    #[test]
    fn l1l2_space_in_input() {
        let text = r#"{"space":{"kind":"l1l2","n":2,"lambda":"7/2"},"points":[["1","0"]]}"#;
        let s = StarInput::from_json(text).unwrap();
        assert_eq!(s.space, SpaceDescriptor::L1PlusLambdaL2(2, q(7, 2)));
    }

    #[test]
    fn bad_inputs() {
        assert!(StarInput::from_json(r#"{"space":{"kind":"z","n":3},"points":[["1","2","3","4"]]}"#)
            .unwrap()
            .instance()
            .is_err());
        assert!(StarInput::from_json(r#"{"space":{"kind":"q","n":3},"points":[]}"#).is_err());
        assert!(StarInput::from_json(r#"{"space":{"kind":"z","n":3},"points":[["x"]]}"#).is_err());
        assert!(parse_points("[[1,2],").is_err());
    }

    #[test]
    fn points_forms() {
        assert_eq!(parse_points(r#"[["1/2","-1/2"]]"#).unwrap(), vec![vec![q(1, 2), q(-1, 2)]]);
        assert_eq!(parse_points(r#"{"points":[[1,-1]],"note":"x"}"#).unwrap(), vec![vec![q(1, 1), q(-1, 1)]]);
    }

    #[test]
    fn families() {
        let f = FamilyInput::from_json(r#"{"m":4,"sets":[[1,2],[3]]}"#).unwrap().family().unwrap();
        assert_eq!(f.members(), &[0b0011, 0b0100]);
        let s = SignedSetsInput::from_json(r#"{"m":3,"sets":[{"pos":[1],"neg":[2]}]}"#).unwrap();
        let xs = s.signed_sets().unwrap();
        assert_eq!(SignedSetsInput::from_signed(&xs), s);
        assert!(FamilyInput::from_json(r#"{"m":2,"sets":[[1,2]]}"#).unwrap().family().is_err());
    }
}
