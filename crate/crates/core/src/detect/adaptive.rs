use crate::auth::{CostMeter, KeyMaterial, SignedDigest};
use crate::detect::line::CellDigests;
use crate::detect::stepper::{run_search, Checker, Progress, Search};
use crate::error::{Error, Result};
use crate::grid::{CellCoord, Grid};
use crate::store::{AdaptiveTree, HashStore, NodeId};

impl CellDigests for AdaptiveTree {
    fn cell_digest(&self, c: CellCoord) -> &SignedDigest {
        self.node(NodeId {
            depth: self.height(),
            index: u64::from(c.row) * u64::from(self.side()) + u64::from(c.col),
        })
    }
}

#[derive(Clone, Copy, Debug)]
enum Phase {
    Root,
    /// Checking child `k` of `node`.
    Child { node: NodeId, k: u64 },
    Done(Progress),
}

/// Root-down descent. Children are checked left to right and the first
/// failing one is entered; if all but the last verify, the last one is
/// entered without checking it.
#[derive(Clone, Debug)]
pub struct AdaptiveSearch<'a> {
    check: Checker<'a>,
    tree: &'a AdaptiveTree,
    phase: Phase,
}

impl<'a> AdaptiveSearch<'a> {
    pub fn new(grid: &'a Grid, key: &'a KeyMaterial, tree: &'a AdaptiveTree) -> Result<Self> {
        tree.digest_set().check_grid(grid)?;
        tree.digest_set().check_key(key)?;
        Ok(Self {
            check: Checker { key, grid },
            tree,
            phase: Phase::Root,
        })
    }

    fn degree(&self, node: NodeId) -> u64 {
        1 << (self.tree.height() - node.depth)
    }

    fn span(&self, depth: u32) -> u64 {
        self.tree.shape().level_spans()[depth as usize]
    }

    fn enter(&mut self, child: NodeId) -> Progress {
        if child.depth == self.tree.height() {
            let m = u64::from(self.tree.side());
            Progress::Found(CellCoord::new((child.index / m) as u32, (child.index % m) as u32))
        } else {
            self.phase = Phase::Child { node: child, k: 0 };
            Progress::NeedMoreWork
        }
    }
}

impl Search for AdaptiveSearch<'_> {
    fn next_cost(&self) -> Option<u64> {
        match self.phase {
            Phase::Root => Some(self.span(0)),
            Phase::Child { node, .. } => Some(self.span(node.depth + 1)),
            Phase::Done(_) => None,
        }
    }

    fn advance(&mut self, meter: &mut CostMeter) -> Result<Progress> {
        let p = match self.phase {
            Phase::Done(p) => return Ok(p),
            Phase::Root => {
                let root = NodeId { depth: 0, index: 0 };
                if self.check.fails(self.tree.node(root), meter)? {
                    self.phase = Phase::Child { node: root, k: 0 };
                    Progress::NeedMoreWork
                } else {
                    Progress::Clean
                }
            }
            Phase::Child { node, k } => {
                let deg = self.degree(node);
                let child = NodeId {
                    depth: node.depth + 1,
                    index: node.index * deg + k,
                };
                meter.reach_stage(child.depth);
                if k + 1 == deg {
                    // every sibling verified, so this one holds the change
                    self.enter(child)
                } else if self.check.fails(self.tree.node(child), meter)? {
                    self.enter(child)
                } else {
                    self.phase = Phase::Child { node, k: k + 1 };
                    Progress::NeedMoreWork
                }
            }
        };
        if p.is_terminal() {
            self.phase = Phase::Done(p);
        }
        Ok(p)
    }
}

pub fn locate_adaptive(
    actual: &Grid,
    key: &KeyMaterial,
    tree: &AdaptiveTree,
    meter: &mut CostMeter,
) -> Result<Option<CellCoord>> {
    if tree.height() == 0 {
        return Err(Error::InconsistentStore("adaptive tree has no levels".into()));
    }
    let mut s = AdaptiveSearch::new(actual, key, tree)?;
    Ok(match run_search(&mut s, meter)? {
        Progress::Found(c) => Some(c),
        _ => None,
    })
}
