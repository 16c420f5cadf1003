use thiserror::Error;

use super::statespace::{explore, StateSpaceExceeded};
use super::{AcceptingOcpn, Arc};

pub const DEFAULT_STATE_BOUND: usize = 1_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SoundnessError {
    #[error("not a workflow net: {0}")]
    NotWorkflowNet(String),
    #[error(transparent)]
    Exceeded(#[from] StateSpaceExceeded),
}

/// Soundness of a single-type workflow net with the default state bound.
pub fn check_soundness(net: &AcceptingOcpn) -> Result<bool, SoundnessError> {
    check_soundness_bounded(net, DEFAULT_STATE_BOUND)
}

/// Option to complete, proper completion and absence of dead transitions,
/// decided on the explicit reachability graph.
pub fn check_soundness_bounded(net: &AcceptingOcpn, bound: usize) -> Result<bool, SoundnessError> {
    check_shape(net)?;
    let space = explore(net, bound)?;
    let fin: Vec<u32> = space
        .places
        .iter()
        .map(|p| net.final_marking().get(p).copied().unwrap_or(0))
        .collect();
    let Some(f) = space.state_of(&fin) else {
        return Ok(false);
    };
    if !space.coreachable(&[f]).iter().all(|&b| b) {
        return Ok(false);
    }
    let covers_final = |m: &Vec<u32>| m.iter().zip(&fin).all(|(a, b)| a >= b);
    if space.markings.iter().any(|m| covers_final(m) && *m != fin) {
        return Ok(false);
    }
    let mut fired = vec![false; space.transitions.len()];
    for out in &space.edges {
        for &(t, _) in out {
            fired[t] = true;
        }
    }
    Ok(fired.into_iter().all(|b| b))
}

fn check_shape(net: &AcceptingOcpn) -> Result<(), SoundnessError> {
    let types = net.object_types();
    if types.len() != 1 {
        return Err(SoundnessError::NotWorkflowNet(format!(
            "expected places of one object type, found {}",
            types.len()
        )));
    }
    let single = |m: &super::Marking, what: &str| {
        if m.len() == 1 && m.values().all(|&n| n == 1) {
            Ok(m.keys().next().cloned().unwrap())
        } else {
            Err(SoundnessError::NotWorkflowNet(format!(
                "{what} marking must be one token on one place"
            )))
        }
    };
    let src = single(net.initial_marking(), "initial")?;
    let snk = single(net.final_marking(), "final")?;
    for a in net.arcs() {
        match a {
            Arc::Output { place, .. } if *place == src => {
                return Err(SoundnessError::NotWorkflowNet(format!("source place {src} has an input arc")))
            }
            Arc::Input { place, .. } if *place == snk => {
                return Err(SoundnessError::NotWorkflowNet(format!("sink place {snk} has an output arc")))
            }
            _ => {}
        }
    }
    Ok(())
}
