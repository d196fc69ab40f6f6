/// Name-keyed table of constructors.
#[derive(Debug, Clone)]
pub struct Registry<F> {
    entries: Vec<(&'static str, F)>,
}

impl<F: Copy> Registry<F> {
    pub fn new() -> Self {
        Self { entries: Vec::new() }
    }

    /// Adds or replaces a constructor.
    pub fn register(&mut self, name: &'static str, factory: F) -> &mut Self {
        match self.entries.iter_mut().find(|(n, _)| *n == name) {
            Some(e) => e.1 = factory,
            None => self.entries.push((name, factory)),
        }
        self
    }

    pub fn get(&self, name: &str) -> Option<F> {
        self.entries.iter().find(|(n, _)| *n == name).map(|(_, f)| *f)
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.entries.iter().map(|(n, _)| *n).collect()
    }
}

impl<F: Copy> Default for Registry<F> {
    fn default() -> Self {
        Self::new()
    }
}
