//! Input checksums and the optional network fetch helper.

use std::fs::File;
use std::io::{self, Read};
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Lowercase hex SHA-256 of a file.
pub fn sha256_file(path: &Path) -> Result<String> {
    let mut f = File::open(path).map_err(|e| match e.kind() {
        io::ErrorKind::NotFound => Error::MissingData(path.to_path_buf()),
        _ => Error::Io(e),
    })?;
    let mut h = Sha256::new();
    let mut buf = vec![0u8; 1 << 16];
    loop {
        let n = f.read(&mut buf)?;
        if n == 0 {
            break;
        }
        h.update(&buf[..n]);
    }
    Ok(hex::encode(h.finalize()))
}

pub fn verify_checksum(path: &Path, expected: &str) -> Result<()> {
    let actual = sha256_file(path)?;
    if !actual.eq_ignore_ascii_case(expected) {
        return Err(Error::Checksum {
            path: path.to_path_buf(),
            expected: expected.to_string(),
            actual,
        });
    }
    Ok(())
}

pub const INTEL_DATA_URL: &str = "http://db.csail.mit.edu/labdata/data.txt.gz";
pub const INTEL_LOCATIONS_URL: &str = "http://db.csail.mit.edu/labdata/mote_locs.txt";

/// Downloads `url` to `dest`, gunzipping `.gz` payloads, and returns the
/// SHA-256 of the written file. With `expected` set, a mismatch removes the
/// file and fails.
#[cfg(feature = "fetch")]
pub fn fetch_file(url: &str, dest: &Path, expected: Option<&str>) -> Result<String> {
    let resp = ureq::get(url)
        .call()
        .map_err(|e| Error::InvalidArgument(format!("download of {url} failed: {e}")))?;
    let body = resp.into_body().into_reader();
    let mut reader: Box<dyn Read> = if url.ends_with(".gz") {
        Box::new(flate2::read::GzDecoder::new(body))
    } else {
        Box::new(body)
    };
    if let Some(dir) = dest.parent() {
        std::fs::create_dir_all(dir)?;
    }
    io::copy(&mut reader, &mut File::create(dest)?)?;
    let digest = sha256_file(dest)?;
    if let Some(exp) = expected {
        if let Err(e) = verify_checksum(dest, exp) {
            let _ = std::fs::remove_file(dest);
            return Err(e);
        }
    }
    Ok(digest)
}
