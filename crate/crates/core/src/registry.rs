//! Name-keyed factories for interchangeable strategies.
//!
//! Each family of algorithms (sensor filters, sled integrators, power-law
//! fitters) exposes a trait and a `registry()` constructor returning a
//! [`Registry`] pre-populated with the built-in variants. Configuration
//! files and CLI flags refer to variants by name.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};

/// Factory signature: build a boxed strategy from family-specific arguments.
pub type Factory<T, A> = fn(&A) -> Box<T>;

pub struct Registry<T: ?Sized, A = ()> {
    kind: &'static str,
    factories: BTreeMap<&'static str, Factory<T, A>>,
}

impl<T: ?Sized, A> Registry<T, A> {
    pub fn new(kind: &'static str) -> Self {
        Self {
            kind,
            factories: BTreeMap::new(),
        }
    }

    /// Registers `factory` under `name`, replacing any previous entry.
    pub fn register(&mut self, name: &'static str, factory: Factory<T, A>) -> &mut Self {
        self.factories.insert(name, factory);
        self
    }

    pub fn with(mut self, name: &'static str, factory: Factory<T, A>) -> Self {
        self.register(name, factory);
        self
    }

    pub fn contains(&self, name: &str) -> bool {
        self.factories.contains_key(name)
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.factories.keys().copied()
    }

    pub fn kind(&self) -> &'static str {
        self.kind
    }

    pub fn create(&self, name: &str, args: &A) -> Result<Box<T>> {
        match self.factories.get(name) {
            Some(factory) => Ok(factory(args)),
            None => Err(Error::UnknownStrategy {
                kind: self.kind,
                name: name.to_string(),
                known: self.names().collect::<Vec<_>>().join(", "),
            }),
        }
    }
}

impl<T: ?Sized, A> fmt::Debug for Registry<T, A> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Registry")
            .field("kind", &self.kind)
            .field("names", &self.factories.keys().collect::<Vec<_>>())
            .finish()
    }
}
