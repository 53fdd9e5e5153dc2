//! Two-cell, two-users-per-cell networks: the uplink built on the aligned
//! X-channel design, the downlink with rotated Alamouti precoding, and the
//! linear downlink alignment baseline.
//!
//! Indices: `h[j][i]` is the link between base station `j` and user `i` of
//! cell `j`; `i[j][i]` is the inter-cell link that touches the same user
//! (uplink: user `(j, i)` to base station `j̄`; downlink: base station `j̄`
//! to user `(j, i)`).

pub mod downlink_ia;
pub mod ibc;
pub mod imac;

pub use downlink_ia::{dlia_channel_output, dlia_decode, dlia_encode, dlia_gammas, dlia_precoders, dlia_receive_filters, random_basis, DliaState};
pub use ibc::{ibc_channel_output, ibc_decode, ibc_encode, ibc_equivalent, ibc_gammas, ibc_precoders, ibc_receive, interference_span, interference_stack, rotated_symbols, row_alamouti, IbcPrecoders};
pub use imac::{imac_channel_output, imac_encode, imac_links, imac_state, ImacTransmit};
