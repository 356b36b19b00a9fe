// Copyright 2026 The rydgate Authors
// SPDX-License-Identifier: Apache-2.0

fn main() {
    std::process::exit(rydgate::cli::run(std::env::args_os()));
}
