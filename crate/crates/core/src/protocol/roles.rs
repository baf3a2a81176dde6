use std::collections::BTreeMap;

use crate::blockdata::{partition_block, Block};
use crate::broadcast::Status;
use crate::crypto::{poly_hash, ver, Commitment, CommitmentTree, CryptoError, HashParams, InclusionProof, KeyRegistry};
use crate::field_codec::{decode_with_errors, CodeParams, EvalDomain, Fe, MERSENNE61};
use crate::ids::NodeId;

use super::{CommitteeRoster, Reveal, Vote};

/// Step 2: `C = COM(B)` and `pi_i` for every transaction.
pub fn leader_commit(block: &Block) -> Result<(Commitment, Vec<InclusionProof>), CryptoError> {
    let tree = CommitmentTree::build(&block.messages())?;
    Ok((tree.commitment(), tree.prove_all()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UncodedCheck {
    Pass,
    Fail,
    /// Fewer proofs than transactions; only the timeout can settle it.
    Incomplete,
}

/// Step 3: every revealed transaction must open `C` at its own index.
pub fn check_uncoded(c: &Commitment, reveal: &Reveal) -> UncodedCheck {
    let g = reveal.block.len();
    if reveal.proofs.len() < g {
        return UncodedCheck::Incomplete;
    }
    let all_open = g > 0
        && c.len as usize == g
        && reveal.proofs.len() == g
        && reveal
            .block
            .transactions
            .iter()
            .zip(&reveal.proofs)
            .enumerate()
            .all(|(i, (tx, pi))| ver(c, &tx.to_bytes(), i + 1, pi));
    if all_open {
        UncodedCheck::Pass
    } else {
        UncodedCheck::Fail
    }
}

/// Decodes the hash polynomial from the first `N - f` received hashes and
/// returns its values at the `K` data points.
pub fn decode_part_hashes(
    hashes: &[(NodeId, Fe)],
    code: &CodeParams,
    domain: &EvalDomain<MERSENNE61>,
) -> Option<Vec<Fe>> {
    let quorum = code.n - code.f;
    if hashes.len() < quorum {
        return None;
    }
    let results: Vec<(Fe, Fe)> = hashes[..quorum]
        .iter()
        .map(|&(id, h)| (domain.node_point(id.0 as usize), h))
        .collect();
    let u = decode_with_errors(&results, (code.k - 1) * code.d_hash, code.f).ok()?;
    Some(domain.data_points().iter().map(|&x| u.eval(x)).collect())
}

/// Step 4: the decoded part hashes must equal the hashes of the locally
/// partitioned block.
pub fn committee_consistency(
    hashes: &[(NodeId, Fe)],
    block: &Block,
    params: &HashParams<MERSENNE61>,
    code: &CodeParams,
    domain: &EvalDomain<MERSENNE61>,
) -> bool {
    let Some(decoded) = decode_part_hashes(hashes, code, domain) else {
        return false;
    };
    let Ok(parts) = partition_block(block, code.k) else {
        return false;
    };
    parts.len() == decoded.len()
        && parts.iter().all(|p| match poly_hash(&p.data, params) {
            Ok(h) => decoded[p.index - 1] == h,
            Err(_) => false,
        })
}

/// Counts valid "yes" votes. Missing, faulty, malformed, or mis-signed
/// votes all count as "no"; without `C` nothing can verify.
pub fn tally(
    reg: &KeyRegistry,
    roster: &CommitteeRoster,
    votes: &BTreeMap<NodeId, Status>,
    c: Option<&Commitment>,
) -> (usize, usize) {
    let yes = match c {
        None => 0,
        Some(c) => roster
            .members
            .iter()
            .filter(|m| {
                votes
                    .get(m)
                    .and_then(Status::accepted)
                    .and_then(|bytes| Vote::from_bytes(bytes).ok())
                    .is_some_and(|v| v.yes && v.verify(reg, **m, c))
            })
            .count(),
    };
    (yes, roster.len() - yes)
}
