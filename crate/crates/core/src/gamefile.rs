//! JSON game files.
//!
//! Every number is an exact rational written as a string (`"0.01"`,
//! `"3/7"`) or a JSON integer. Binary floating-point literals are
//! rejected so that files mean exactly what they say.

use std::fmt;
use std::path::Path;
use std::sync::Arc;

use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::congestion::{
    build_game, make_interference, make_scheduling, BottleneckGame, CongestionModel, Facility, FacilityCost,
    WeightedEdge,
};
use crate::error::{Error, Result};
use crate::game::FiniteGame;
use crate::rational::{self, Rational};
use crate::routing::{RoutingArc, RoutingInstance};
use crate::splittable::{PwlCost, SplitFacility, SplittableInstance};

/// A rational in file notation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Q(pub Rational);

impl Serialize for Q {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&rational::format(&self.0))
    }
}

impl<'de> Deserialize<'de> for Q {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = Q;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("an integer or a decimal/fraction string")
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Q, E> {
                Ok(Q(rational::int(v)))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Q, E> {
                Ok(Q(Rational::from_integer(v.into())))
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<Q, E> {
                Err(E::custom(format!("float literal {v} is not exact; write it as a string")))
            }

            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Q, E> {
                rational::parse(v).map(Q).map_err(E::custom)
            }
        }
        d.deserialize_any(V)
    }
}

fn qs(v: &[Rational]) -> Vec<Q> {
    v.iter().cloned().map(Q).collect()
}

fn rs(v: &[Q]) -> Vec<Rational> {
    v.iter().map(|q| q.0.clone()).collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeSpec {
    pub a: usize,
    pub b: usize,
    pub weight: Q,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CostSpec {
    LoadTable(Vec<Q>),
    SetTable(Vec<Q>),
    Interference(Vec<EdgeSpec>),
    Additive(Vec<Q>),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FacilitySpec {
    pub name: String,
    pub cost: CostSpec,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArcSpec {
    pub tail: String,
    pub head: String,
    pub cost: Vec<Q>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitFacilitySpec {
    pub name: String,
    /// `[load, cost]` pairs starting at load 0.
    pub breakpoints: Vec<(Q, Q)>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GameFile {
    NormalForm {
        strategy_counts: Vec<usize>,
        /// One cost row per profile, first player most significant.
        costs: Vec<Vec<Q>>,
    },
    Congestion {
        players: usize,
        facilities: Vec<FacilitySpec>,
        strategies: Vec<Vec<Vec<usize>>>,
    },
    Routing {
        vertices: Vec<String>,
        arcs: Vec<ArcSpec>,
        /// `[source, sink]` per player.
        terminals: Vec<(String, String)>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        cost_bound: Option<Q>,
    },
    Splittable {
        facilities: Vec<SplitFacilitySpec>,
        strategies: Vec<Vec<Vec<usize>>>,
        demands: Vec<Q>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        cost_bound: Option<Q>,
    },
    Scheduling {
        /// `times[job][machine]`.
        times: Vec<Vec<Q>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        allowed: Option<Vec<Vec<usize>>>,
    },
    Interference {
        players: usize,
        stations: usize,
        edges: Vec<EdgeSpec>,
    },
}

/// A game file turned into library objects.
#[derive(Clone, Debug)]
pub enum LoadedGame {
    NormalForm(FiniteGame),
    Congestion(BottleneckGame),
    Routing(RoutingInstance),
    Splittable(SplittableInstance),
}

impl LoadedGame {
    pub fn kind(&self) -> &'static str {
        match self {
            LoadedGame::NormalForm(_) => "normal_form",
            LoadedGame::Congestion(_) => "congestion",
            LoadedGame::Routing(_) => "routing",
            LoadedGame::Splittable(_) => "splittable",
        }
    }

    /// The finite game, with routing strategies enumerated as simple paths.
    pub fn finite(&self) -> Result<FiniteGame> {
        Ok(self.bottleneck()?.map_or_else(
            || match self {
                LoadedGame::NormalForm(g) => g.clone(),
                _ => unreachable!("only normal-form games lack a model"),
            },
            |b| b.into_game(),
        ))
        .and_then(|g| match self {
            LoadedGame::Splittable(_) => Err(Error::validation("kind", "splittable games are not finite")),
            _ => Ok(g),
        })
    }

    /// The bottleneck game when the file describes a congestion model.
    pub fn bottleneck(&self) -> Result<Option<BottleneckGame>> {
        match self {
            LoadedGame::Congestion(b) => Ok(Some(b.clone())),
            LoadedGame::Routing(r) => Ok(Some(build_game(r.to_model()?))),
            LoadedGame::NormalForm(_) => Ok(None),
            LoadedGame::Splittable(_) => Err(Error::validation("kind", "splittable games are not finite")),
        }
    }
}

fn vertex_index(vertices: &[String], name: &str) -> Result<usize> {
    vertices
        .iter()
        .position(|v| v == name)
        .ok_or_else(|| Error::validation("vertices", format!("unknown vertex {name:?}")))
}

impl GameFile {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::validation("game file", format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("game files always serialize")
    }

    pub fn kind(&self) -> &'static str {
        match self {
            GameFile::NormalForm { .. } => "normal_form",
            GameFile::Congestion { .. } => "congestion",
            GameFile::Routing { .. } => "routing",
            GameFile::Splittable { .. } => "splittable",
            GameFile::Scheduling { .. } => "scheduling",
            GameFile::Interference { .. } => "interference",
        }
    }

    pub fn build(&self) -> Result<LoadedGame> {
        match self {
            GameFile::NormalForm { strategy_counts, costs } => Ok(LoadedGame::NormalForm(FiniteGame::from_table(
                strategy_counts.clone(),
                costs.iter().map(|r| rs(r)).collect(),
            )?)),
            GameFile::Congestion {
                players,
                facilities,
                strategies,
            } => {
                let facilities = facilities
                    .iter()
                    .map(|f| Facility {
                        name: f.name.clone(),
                        cost: match &f.cost {
                            CostSpec::LoadTable(t) => FacilityCost::LoadTable(rs(t)),
                            CostSpec::SetTable(t) => FacilityCost::SetTable(rs(t)),
                            CostSpec::Additive(t) => FacilityCost::Additive(rs(t)),
                            CostSpec::Interference(e) => FacilityCost::Interference(Arc::new(edges(e))),
                        },
                    })
                    .collect();
                let model = CongestionModel::new(*players, facilities, strategies.clone())?;
                Ok(LoadedGame::Congestion(build_game(model)))
            }
            GameFile::Routing {
                vertices,
                arcs,
                terminals,
                cost_bound,
            } => {
                let arcs = arcs
                    .iter()
                    .map(|a| {
                        Ok(RoutingArc {
                            tail: vertex_index(vertices, &a.tail)?,
                            head: vertex_index(vertices, &a.head)?,
                            cost: rs(&a.cost),
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                let terminals = terminals
                    .iter()
                    .map(|(s, t)| Ok((vertex_index(vertices, s)?, vertex_index(vertices, t)?)))
                    .collect::<Result<Vec<_>>>()?;
                Ok(LoadedGame::Routing(RoutingInstance::new(
                    vertices.clone(),
                    arcs,
                    terminals,
                    cost_bound.as_ref().map(|q| q.0.clone()),
                )?))
            }
            GameFile::Splittable {
                facilities,
                strategies,
                demands,
                cost_bound,
            } => {
                let facilities = facilities
                    .iter()
                    .map(|f| {
                        Ok(SplitFacility {
                            name: f.name.clone(),
                            cost: PwlCost::new(f.breakpoints.iter().map(|(x, y)| (x.0.clone(), y.0.clone())).collect())?,
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(LoadedGame::Splittable(SplittableInstance::new(
                    facilities,
                    strategies.clone(),
                    rs(demands),
                    cost_bound.as_ref().map(|q| q.0.clone()),
                )?))
            }
            GameFile::Scheduling { times, allowed } => Ok(LoadedGame::Congestion(build_game(make_scheduling(
                times.iter().map(|r| rs(r)).collect(),
                allowed.clone(),
            )?))),
            GameFile::Interference {
                players,
                stations,
                edges: e,
            } => Ok(LoadedGame::Congestion(build_game(make_interference(
                *players,
                *stations,
                edges(e),
            )?))),
        }
    }

    /// Tabulates any finite game.
    pub fn from_finite(game: &FiniteGame) -> Result<Self> {
        let table = game.table()?;
        Ok(GameFile::NormalForm {
            strategy_counts: game.strategy_counts().to_vec(),
            costs: (0..table.len()).map(|i| qs(table.costs(i))).collect(),
        })
    }

    pub fn from_model(model: &CongestionModel) -> Self {
        GameFile::Congestion {
            players: model.players(),
            facilities: model
                .facilities()
                .iter()
                .map(|f| FacilitySpec {
                    name: f.name.clone(),
                    cost: match &f.cost {
                        FacilityCost::LoadTable(t) => CostSpec::LoadTable(qs(t)),
                        FacilityCost::SetTable(t) => CostSpec::SetTable(qs(t)),
                        FacilityCost::Additive(t) => CostSpec::Additive(qs(t)),
                        FacilityCost::Interference(e) => CostSpec::Interference(
                            e.iter()
                                .map(|e| EdgeSpec {
                                    a: e.a,
                                    b: e.b,
                                    weight: Q(e.weight.clone()),
                                })
                                .collect(),
                        ),
                    },
                })
                .collect(),
            strategies: model.strategies().to_vec(),
        }
    }

    pub fn from_routing(inst: &RoutingInstance) -> Self {
        let name = |v: usize| inst.vertices[v].clone();
        GameFile::Routing {
            vertices: inst.vertices.clone(),
            arcs: inst
                .arcs
                .iter()
                .map(|a| ArcSpec {
                    tail: name(a.tail),
                    head: name(a.head),
                    cost: qs(&a.cost),
                })
                .collect(),
            terminals: inst.terminals.iter().map(|&(s, t)| (name(s), name(t))).collect(),
            cost_bound: Some(Q(inst.cost_bound.clone())),
        }
    }

    pub fn from_splittable(inst: &SplittableInstance) -> Self {
        GameFile::Splittable {
            facilities: inst
                .facilities()
                .iter()
                .map(|f| SplitFacilitySpec {
                    name: f.name.clone(),
                    breakpoints: f.cost.points().iter().map(|(x, y)| (Q(x.clone()), Q(y.clone()))).collect(),
                })
                .collect(),
            strategies: inst.strategies().to_vec(),
            demands: qs(inst.demands()),
            cost_bound: Some(Q(inst.cost_bound().clone())),
        }
    }
}

fn edges(e: &[EdgeSpec]) -> Vec<WeightedEdge> {
    e.iter()
        .map(|e| WeightedEdge {
            a: e.a,
            b: e.b,
            weight: e.weight.0.clone(),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::rational::ratio;

    #[test]
    fn decimal_strings_are_exact() {
        let f = GameFile::from_json(
            r#"{"kind":"normal_form","strategy_counts":[2],"costs":[["0.01"],[3]]}"#,
        )
        .unwrap();
        let g = match f.build().unwrap() {
            LoadedGame::NormalForm(g) => g,
            _ => panic!(),
        };
        assert_eq!(g.costs(&crate::Profile(vec![0])).unwrap(), vec![ratio(1, 100)]);
    }

    #[test]
    fn float_literals_are_rejected() {
        let err = GameFile::from_json(r#"{"kind":"normal_form","strategy_counts":[1],"costs":[[0.5]]}"#).unwrap_err();
        assert!(err.to_string().contains("not exact"));
    }

    #[test]
    fn round_trips() {
        let files = vec![
            GameFile::from_finite(&fixtures::example_root(3, rational::int(1), ratio(1, 100))).unwrap(),
            GameFile::from_model(&fixtures::upsilon_counter()),
            GameFile::from_routing(&fixtures::routing_pne_not_sne()),
            GameFile::from_splittable(&fixtures::splittable_discontinuity()),
            GameFile::Interference {
                players: 2,
                stations: 2,
                edges: vec![EdgeSpec { a: 0, b: 1, weight: Q(rational::int(3)) }],
            },
            GameFile::Scheduling {
                times: vec![vec![Q(rational::int(1)), Q(ratio(5, 2))]],
                allowed: None,
            },
        ];
        for f in files {
            let text = f.to_json();
            let back = GameFile::from_json(&text).unwrap();
            assert_eq!(back, f);
            let a: serde_json::Value = serde_json::from_str(&text).unwrap();
            let b: serde_json::Value = serde_json::from_str(&back.to_json()).unwrap();
            assert_eq!(a, b);
            back.build().unwrap();
        }
    }

    #[test]
    fn validation_errors_surface() {
        let bad = r#"{"kind":"congestion","players":2,"facilities":[{"name":"f","cost":{"load_table":["0","2","1"]}}],"strategies":[[[0]],[[0]]]}"#;
        let err = GameFile::from_json(bad).unwrap().build().unwrap_err();
        assert!(err.to_string().contains("monotonicity"));
        let unknown = r#"{"kind":"routing","vertices":["s","t"],"arcs":[{"tail":"s","head":"x","cost":["0","1"]}],"terminals":[["s","t"]]}"#;
        assert!(GameFile::from_json(unknown).unwrap().build().is_err());
    }
}
