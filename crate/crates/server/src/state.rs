use std::collections::BTreeSet;
use std::sync::{Arc, Mutex, MutexGuard, PoisonError};

use ema_core::time::{EpochMillis, UtcOffset};

use crate::auth::hash_token;
use crate::clock::Clock;
use crate::store::Store;

#[derive(Debug, Clone, Default)]
pub struct ServiceConfig {
    pub clock: Option<Clock>,
    /// Offset that places notification windows on local days.
    pub offset: UtcOffset,
    /// Bearer token that authenticates as administrator.
    pub admin_token: Option<String>,
    /// When set, usage reports may only mention these packages.
    pub tracked_packages: Option<BTreeSet<String>>,
}

struct Inner {
    // One lock for the whole store serializes writes, which also gives
    // per-user ordering and atomic idempotency checks.
    store: Mutex<Store>,
    clock: Clock,
    offset: UtcOffset,
    admin_token_hash: Option<String>,
    tracked_packages: Option<BTreeSet<String>>,
}

#[derive(Clone)]
pub struct AppState {
    inner: Arc<Inner>,
}

impl AppState {
    pub fn new(store: Store, config: ServiceConfig) -> Self {
        Self {
            inner: Arc::new(Inner {
                store: Mutex::new(store),
                clock: config.clock.unwrap_or(Clock::System),
                offset: config.offset,
                admin_token_hash: config.admin_token.as_deref().map(hash_token),
                tracked_packages: config.tracked_packages,
            }),
        }
    }

    pub fn store(&self) -> MutexGuard<'_, Store> {
        // a transaction left open by a panic is rolled back by the next one
        self.inner.store.lock().unwrap_or_else(PoisonError::into_inner)
    }

    pub fn now(&self) -> EpochMillis {
        self.inner.clock.now()
    }

    pub fn offset(&self) -> UtcOffset {
        self.inner.offset
    }

    pub fn admin_token_hash(&self) -> Option<&str> {
        self.inner.admin_token_hash.as_deref()
    }

    pub fn tracked_packages(&self) -> Option<&BTreeSet<String>> {
        self.inner.tracked_packages.as_ref()
    }
}
