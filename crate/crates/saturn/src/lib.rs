//! A saturation-based first-order prover whose clause selection can be
//! guided by a recursive neural network that looks only at how each
//! clause was derived, never at its logical content.
//!
//! The pieces, bottom up:
//!
//! * [`fol`] — clauses, a CNF problem-file parser, unification.
//! * [`saturation`] — the given-clause loop with resolution, factoring
//!   and subsumption resolution, plus layered clause selection.
//! * [`sine`] — SInE levels: a heuristic symbol-sharing distance of
//!   each input clause from the conjecture.
//! * [`derivation`] — derivation DAG recording, proof extraction,
//!   training labels, and the merge/collapse machinery that packs many
//!   derivations into one batch.
//! * [`model`] — the network itself: init embeddings, per-rule deriv
//!   blocks, the SInE embedder, the eval head, and model files.
//! * [`training`] — weighted BCE loss, exact reverse-mode gradients,
//!   the learning-rate schedule, swapout, and sequential plus
//!   master-worker parallel training.
//! * [`harness`] — corpus generation, benchmark sweeps, ablations, and
//!   the looping orchestrator tying everything together.
//!
//! The `parallel` feature (on by default) uses rayon to fan benchmark
//! sweeps out across threads; without it every sweep runs sequentially.
//! Parallel training does not depend on the feature: it always uses its
//! own master-worker threads.

pub mod derivation;
pub mod fol;
pub mod harness;
pub mod model;
pub mod saturation;
pub mod sine;
pub mod training;
