// Copyright 2026 The rydgate Authors
// SPDX-License-Identifier: Apache-2.0

pub mod cli;
pub mod darkstates;
pub mod dynamics;
pub mod experiments;
pub mod gates;
pub mod geometry;
pub mod hamiltonian;
pub mod linalg;
pub mod pulses;
