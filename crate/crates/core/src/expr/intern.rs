//! The global table behind hash-consing. Entries are weak, so the table
//! never keeps an expression alive; dead entries are dropped lazily.

use std::collections::hash_map::DefaultHasher;
use std::collections::HashMap;
use std::hash::{Hash, Hasher};
use std::sync::{Arc, Mutex, OnceLock, Weak};

use super::{Expr, Info, Inner, Node};

struct Table {
    buckets: HashMap<u64, Vec<Weak<Inner>>>,
    /// Bucket count after the last sweep.
    swept: usize,
}

static TABLE: OnceLock<Mutex<Table>> = OnceLock::new();

/// The node's hash; children contribute their cached hashes.
fn shallow_hash(node: &Node) -> u64 {
    let mut h = DefaultHasher::new();
    node.hash(&mut h);
    h.finish()
}

pub(super) fn intern(node: Node) -> Expr {
    let hash = shallow_hash(&node);
    let table = TABLE.get_or_init(|| {
        Mutex::new(Table {
            buckets: HashMap::new(),
            swept: 0,
        })
    });
    // A panic elsewhere cannot leave the table inconsistent.
    let mut t = table.lock().unwrap_or_else(|p| p.into_inner());
    let bucket = t.buckets.entry(hash).or_default();
    bucket.retain(|w| w.strong_count() > 0);
    for w in bucket.iter() {
        if let Some(inner) = w.upgrade() {
            if inner.node == node {
                return Expr(inner);
            }
        }
    }
    let info = Info::of(&node);
    let inner = Arc::new(Inner { node, hash, info });
    bucket.push(Arc::downgrade(&inner));
    if t.buckets.len() > 2 * t.swept + 4096 {
        t.buckets.retain(|_, b| {
            b.retain(|w| w.strong_count() > 0);
            !b.is_empty()
        });
        t.swept = t.buckets.len();
    }
    Expr(inner)
}
