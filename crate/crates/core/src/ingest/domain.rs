use std::net::IpAddr;
use std::sync::OnceLock;

use publicsuffix::{List, Psl};

use crate::{Error, Result};

/// Vendored public-suffix snapshot. Kept in-repo so domain extraction never
/// depends on the network.
const PSL_SNAPSHOT: &str = include_str!("../../data/public_suffix_list.dat");

fn suffix_list() -> &'static List {
    static LIST: OnceLock<List> = OnceLock::new();
    LIST.get_or_init(|| PSL_SNAPSHOT.parse().expect("vendored public suffix list parses"))
}

/// Returns the registrable domain (public suffix plus one label) of `hostname`.
/// IP literals are returned unchanged, and a hostname that is itself a public
/// suffix is returned as-is.
pub fn registrable_domain(hostname: &str) -> Result<String> {
    let host = hostname.trim().trim_end_matches('.').to_ascii_lowercase();
    if host.is_empty() {
        return Err(Error::EmptyHostname);
    }
    let bare = host.trim_start_matches('[').trim_end_matches(']');
    if bare.parse::<IpAddr>().is_ok() {
        return Ok(bare.to_string());
    }
    match suffix_list().domain(host.as_bytes()) {
        Some(domain) => Ok(String::from_utf8_lossy(domain.as_bytes()).into_owned()),
        None => Ok(host),
    }
}
