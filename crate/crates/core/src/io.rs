//! Graph and matching interchange formats.
//!
//! JSON: `{"D": 3, "vertices": 4, "matchings": [[[0,1],[2,3]], …]}`, one
//! pair list per color. A document that nests this object under a
//! `"graph"` or `"result.graph"` key (as `gen` reports do) is accepted too.
//!
//! Text: `D n | u-v,u-v ; u-v,… ; …` with one block per color and `n` the
//! number of vertex pairs.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::graph::{ColoredGraph, Matching};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphJson {
    #[serde(rename = "D")]
    pub colors: usize,
    pub vertices: usize,
    pub matchings: Vec<Vec<(usize, usize)>>,
}

impl From<&ColoredGraph> for GraphJson {
    fn from(g: &ColoredGraph) -> Self {
        Self {
            colors: g.colors(),
            vertices: g.vertex_count(),
            matchings: g.matchings().iter().map(Matching::pair_list).collect(),
        }
    }
}

impl TryFrom<GraphJson> for ColoredGraph {
    type Error = Error;

    fn try_from(j: GraphJson) -> Result<Self> {
        if j.matchings.len() != j.colors {
            return Err(Error::Parse(format!(
                "\"D\" is {} but {} matchings are listed",
                j.colors,
                j.matchings.len()
            )));
        }
        ColoredGraph::from_pairs(j.vertices, &j.matchings)
    }
}

impl Serialize for ColoredGraph {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        GraphJson::from(self).serialize(s)
    }
}

/// Serialized as its sorted pair list.
impl Serialize for Matching {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.pair_list().serialize(s)
    }
}

pub fn graph_to_json(g: &ColoredGraph) -> String {
    serde_json::to_string(&GraphJson::from(g)).expect("graph serializes")
}

pub fn graph_from_json(s: &str) -> Result<ColoredGraph> {
    let value: Value = serde_json::from_str(s).map_err(|e| Error::Parse(format!("graph JSON: {e}")))?;
    graph_from_value(value)
}

pub fn graph_from_value(mut value: Value) -> Result<ColoredGraph> {
    if let Some(inner) = value.get_mut("graph") {
        value = inner.take();
    } else if let Some(inner) = value.get_mut("result").and_then(|r| r.get_mut("graph")) {
        value = inner.take();
    }
    let j: GraphJson = serde_json::from_value(value).map_err(|e| Error::Parse(format!("graph JSON: {e}")))?;
    ColoredGraph::try_from(j)
}

pub fn graph_to_text(g: &ColoredGraph) -> String {
    let blocks: Vec<String> = g
        .matchings()
        .iter()
        .map(|m| {
            m.pair_list()
                .iter()
                .map(|(u, v)| format!("{u}-{v}"))
                .collect::<Vec<_>>()
                .join(",")
        })
        .collect();
    format!("{} {} | {}", g.colors(), g.half_order(), blocks.join(" ; "))
}

pub fn graph_from_text(s: &str) -> Result<ColoredGraph> {
    let (head, body) = s
        .split_once('|')
        .ok_or_else(|| Error::Parse("expected 'D n | pairs ; …'".into()))?;
    let nums: Vec<&str> = head.split_whitespace().collect();
    let [d, n] = nums.as_slice() else {
        return Err(Error::Parse(format!(
            "expected 'D n' before '|', got '{}'",
            head.trim()
        )));
    };
    let d: usize = d.parse().map_err(|_| Error::Parse(format!("bad D '{d}'")))?;
    let n: usize = n.parse().map_err(|_| Error::Parse(format!("bad n '{n}'")))?;
    let blocks: Vec<&str> = body.split(';').collect();
    if blocks.len() != d {
        return Err(Error::Parse(format!(
            "D is {d} but {} color blocks are given",
            blocks.len()
        )));
    }
    let colors = blocks.iter().map(|b| parse_pairs(b)).collect::<Result<Vec<_>>>()?;
    ColoredGraph::from_pairs(2 * n, &colors)
}

/// Accepts either format, detected by the first non-blank character.
pub fn parse_graph(s: &str) -> Result<ColoredGraph> {
    if s.trim_start().starts_with('{') {
        graph_from_json(s)
    } else {
        graph_from_text(s.trim())
    }
}

/// `"0-1,2-3"`, `"0-1 2-3"` or a JSON list `[[0,1],[2,3]]`.
pub fn parse_pairs(s: &str) -> Result<Vec<(usize, usize)>> {
    let t = s.trim();
    if t.starts_with('[') {
        return serde_json::from_str(t).map_err(|e| Error::Parse(format!("pair list: {e}")));
    }
    t.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|p| !p.is_empty())
        .map(|p| {
            let (a, b) = p
                .split_once('-')
                .ok_or_else(|| Error::Parse(format!("expected 'u-v', got '{p}'")))?;
            let a = a.parse().map_err(|_| Error::Parse(format!("bad vertex '{a}'")))?;
            let b = b.parse().map_err(|_| Error::Parse(format!("bad vertex '{b}'")))?;
            Ok((a, b))
        })
        .collect()
}

/// A (possibly partial) matching on `vertices` vertices.
pub fn parse_matching(s: &str, vertices: usize) -> Result<Matching> {
    Matching::from_pairs(vertices, parse_pairs(s)?)
}

pub fn parse_perfect_matching(s: &str, vertices: usize) -> Result<Matching> {
    Matching::perfect_from_pairs(vertices, parse_pairs(s)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::named::quartic_melon;

    #[test]
    fn json_round_trip() {
        let g = quartic_melon();
        let s = graph_to_json(&g);
        assert_eq!(
            s,
            r#"{"D":3,"vertices":4,"matchings":[[[0,1],[2,3]],[[0,2],[1,3]],[[0,1],[2,3]]]}"#
        );
        assert_eq!(graph_from_json(&s).unwrap(), g);
        let nested = format!(r#"{{"seed":1,"graph":{s}}}"#);
        assert_eq!(parse_graph(&nested).unwrap(), g);
    }

    #[test]
    fn text_round_trip() {
        let g = quartic_melon();
        let s = graph_to_text(&g);
        assert_eq!(s, "3 2 | 0-1,2-3 ; 0-2,1-3 ; 0-1,2-3");
        assert_eq!(parse_graph(&s).unwrap(), g);
    }

    #[test]
    fn rejects_non_perfect_naming_color() {
        let err = graph_from_text("2 2 | 0-1,2-3 ; 0-2").unwrap_err();
        assert!(matches!(err, Error::NotPerfect { color: 2, .. }), "{err}");
        assert!(err.to_string().contains('2'));
        let err = graph_from_json(r#"{"D":2,"vertices":4,"matchings":[[[0,1],[2,3]],[[0,1],[1,3]]]}"#).unwrap_err();
        assert!(err.to_string().contains("color 2"), "{err}");
        assert!(graph_from_text("3 2 | 0-1,2-3 ; 0-2,1-3").is_err());
        assert!(graph_from_json("{").is_err());
    }

    #[test]
    fn pair_lists() {
        assert_eq!(parse_pairs("0-1, 2-3").unwrap(), vec![(0, 1), (2, 3)]);
        assert_eq!(parse_pairs("[[4,1]]").unwrap(), vec![(4, 1)]);
        assert!(parse_matching("0-1,1-2", 4).is_err());
        assert!(parse_perfect_matching("0-1", 4).is_err());
        assert_eq!(parse_matching("4-1", 6).unwrap().len(), 1);
    }
}
