//! Resource limits for exact set computations.
//!
//! The window cap bounds the number of explicit positions any intermediate
//! [`EPSet`](crate::EPSet) may hold. The process-wide default is `2^20`,
//! overridable through the `EPITER_WINDOW_CAP` environment variable or
//! [`set_default_window_cap`]; [`with_window_cap`] scopes an override to the
//! current thread.

use std::cell::Cell;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::OnceLock;

pub const DEFAULT_WINDOW_CAP: usize = 1 << 20;
pub const WINDOW_CAP_ENV: &str = "EPITER_WINDOW_CAP";

static GLOBAL_CAP: AtomicUsize = AtomicUsize::new(0);
static ENV_CAP: OnceLock<usize> = OnceLock::new();

thread_local! {
    static LOCAL_CAP: Cell<Option<usize>> = const { Cell::new(None) };
}

fn env_cap() -> usize {
    *ENV_CAP.get_or_init(|| {
        std::env::var(WINDOW_CAP_ENV)
            .ok()
            .and_then(|v| v.trim().parse::<usize>().ok())
            .filter(|&v| v > 0)
            .unwrap_or(DEFAULT_WINDOW_CAP)
    })
}

/// The cap in force on this thread.
pub fn window_cap() -> usize {
    if let Some(c) = LOCAL_CAP.with(|c| c.get()) {
        return c;
    }
    match GLOBAL_CAP.load(Ordering::Relaxed) {
        0 => env_cap(),
        c => c,
    }
}

pub fn set_default_window_cap(cap: usize) {
    GLOBAL_CAP.store(cap.max(1), Ordering::Relaxed);
}

/// Runs `f` with `cap` as this thread's window cap.
pub fn with_window_cap<T>(cap: usize, f: impl FnOnce() -> T) -> T {
    struct Restore(Option<usize>);
    impl Drop for Restore {
        fn drop(&mut self) {
            LOCAL_CAP.with(|c| c.set(self.0));
        }
    }
    let _restore = Restore(LOCAL_CAP.with(|c| c.replace(Some(cap.max(1)))));
    f()
}

pub(crate) fn check_window(len: u128) -> crate::Result<usize> {
    let cap = window_cap();
    if len > cap as u128 {
        return Err(crate::Error::WindowCap { needed: len, cap });
    }
    Ok(len as usize)
}
