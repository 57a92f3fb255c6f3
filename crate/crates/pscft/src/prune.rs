//! Removal of statement-less blocks. Each removed block is bridged by the
//! full predecessor-successor product, so which call statements can reach
//! which is exactly preserved. Self-loops created by bridging a cycle are
//! kept for the same reason: `A -> empty -> A` makes A's own statements
//! mutually reachable, and `A -> A` must survive to preserve that.

use evm_lift::ir::FunctionIR;

use crate::filter::CallContract;
use crate::statement::CallStatement;

/// Drops every empty block except the entry, which anchors the function
/// even when empty. Edges stay symmetric throughout.
pub fn prune_cfg(func: &mut FunctionIR<CallStatement>) {
    let empties: Vec<u32> = func
        .blocks
        .iter()
        .filter(|(id, b)| **id != func.entry_block && b.statements.is_empty())
        .map(|(id, _)| *id)
        .collect();
    for b in empties {
        let removed = func.blocks.remove(&b).expect("listed block exists");
        let preds: Vec<u32> = removed.predecessors.iter().copied().filter(|&p| p != b).collect();
        let succs: Vec<u32> = removed.successors.iter().copied().filter(|&s| s != b).collect();
        for &p in &preds {
            func.blocks.get_mut(&p).expect("edges are symmetric").successors.remove(&b);
        }
        for &s in &succs {
            func.blocks.get_mut(&s).expect("edges are symmetric").predecessors.remove(&b);
        }
        for &p in &preds {
            for &s in &succs {
                func.blocks.get_mut(&p).unwrap().successors.insert(s);
                func.blocks.get_mut(&s).unwrap().predecessors.insert(p);
            }
        }
    }
}

pub fn prune_contract(contract: &mut CallContract) {
    for f in &mut contract.functions {
        prune_cfg(f);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::statement::{CallKind, CallStatement};
    use evm_lift::cfg::BasicBlock;
    use evm_lift::ir::Visibility;

    fn call(offset: u32) -> CallStatement {
        CallStatement::new(offset, CallKind::Call)
    }

    fn graph(blocks: &[(u32, usize)], edges: &[(u32, u32)]) -> FunctionIR<CallStatement> {
        let mut f = FunctionIR::new("f", Visibility::Public, blocks[0].0);
        let mut next_offset = 0;
        for &(id, n) in blocks {
            let mut b = BasicBlock::new(id);
            for _ in 0..n {
                b.statements.push(call(next_offset));
                next_offset += 1;
            }
            f.blocks.insert(id, b);
        }
        for &(from, to) in edges {
            f.blocks.get_mut(&from).unwrap().successors.insert(to);
            f.blocks.get_mut(&to).unwrap().predecessors.insert(from);
        }
        f
    }

    #[test]
    fn lone_call_block_is_untouched() {
        let mut f = graph(&[(0, 1)], &[]);
        let before = f.clone();
        prune_cfg(&mut f);
        assert_eq!(f, before);
    }

    #[test]
    fn chain_bridges_over_the_empty_middle() {
        let mut f = graph(&[(0, 1), (1, 0), (2, 1)], &[(0, 1), (1, 2)]);
        prune_cfg(&mut f);
        assert!(f.blocks.contains_key(&0) && f.blocks.contains_key(&2));
        assert!(!f.blocks.contains_key(&1));
        assert!(f.blocks[&0].successors.contains(&2));
        assert!(f.blocks[&2].predecessors.contains(&0));
    }

    #[test]
    fn diamond_of_empties_dedups_to_one_edge() {
        let mut f = graph(
            &[(0, 1), (1, 0), (2, 0), (3, 1)],
            &[(0, 1), (0, 2), (1, 3), (2, 3)],
        );
        prune_cfg(&mut f);
        let keys: Vec<u32> = f.blocks.keys().copied().collect();
        assert_eq!(keys, vec![0, 3]);
        assert_eq!(f.blocks[&0].successors.iter().copied().collect::<Vec<_>>(), vec![3]);
        assert_eq!(f.blocks[&3].predecessors.iter().copied().collect::<Vec<_>>(), vec![0]);
    }

    #[test]
    fn cycle_through_empty_becomes_self_loop() {
        // 0(call) -> 1(empty) -> 0: statements in 0 reach themselves
        let mut f = graph(&[(0, 1), (1, 0)], &[(0, 1), (1, 0)]);
        prune_cfg(&mut f);
        assert!(f.blocks[&0].successors.contains(&0));
        assert!(f.blocks[&0].predecessors.contains(&0));
    }

    #[test]
    fn empty_entry_survives_as_anchor() {
        let mut f = graph(&[(0, 0), (1, 1)], &[(0, 1)]);
        prune_cfg(&mut f);
        assert!(f.blocks.contains_key(&0));
        assert!(f.blocks[&0].statements.is_empty());
    }

    #[test]
    fn empty_block_cycle_among_empties_collapses() {
        // 0(call) -> 1(empty) <-> 2(empty), 2 -> 3(call)
        let mut f = graph(
            &[(0, 1), (1, 0), (2, 0), (3, 1)],
            &[(0, 1), (1, 2), (2, 1), (2, 3)],
        );
        prune_cfg(&mut f);
        let keys: Vec<u32> = f.blocks.keys().copied().collect();
        assert_eq!(keys, vec![0, 3]);
        assert!(f.blocks[&0].successors.contains(&3));
    }
}
