use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// The fourteen merchant categories of the transaction data.
///
/// The declaration order fixes the integer index used by the one-hot
/// feature block and must not change.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum MerchantCategory {
    Entertainment,
    FoodDining,
    GasTransport,
    GroceryOnline,
    GroceryInPerson,
    HealthFitness,
    Home,
    KidsPets,
    MiscOnline,
    MiscInPerson,
    PersonalCare,
    ShoppingOnline,
    ShoppingInPerson,
    Travel,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown merchant category `{0}`")]
pub struct ParseCategoryError(pub String);

impl MerchantCategory {
    pub const COUNT: usize = 14;

    pub const ALL: [MerchantCategory; Self::COUNT] = [
        MerchantCategory::Entertainment,
        MerchantCategory::FoodDining,
        MerchantCategory::GasTransport,
        MerchantCategory::GroceryOnline,
        MerchantCategory::GroceryInPerson,
        MerchantCategory::HealthFitness,
        MerchantCategory::Home,
        MerchantCategory::KidsPets,
        MerchantCategory::MiscOnline,
        MerchantCategory::MiscInPerson,
        MerchantCategory::PersonalCare,
        MerchantCategory::ShoppingOnline,
        MerchantCategory::ShoppingInPerson,
        MerchantCategory::Travel,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(index: usize) -> Option<Self> {
        Self::ALL.get(index).copied()
    }

    /// Canonical kebab-case name, used in configs and reports.
    pub fn name(self) -> &'static str {
        match self {
            MerchantCategory::Entertainment => "entertainment",
            MerchantCategory::FoodDining => "food-dining",
            MerchantCategory::GasTransport => "gas-transport",
            MerchantCategory::GroceryOnline => "grocery-online",
            MerchantCategory::GroceryInPerson => "grocery-in-person",
            MerchantCategory::HealthFitness => "health-fitness",
            MerchantCategory::Home => "home",
            MerchantCategory::KidsPets => "kids-pets",
            MerchantCategory::MiscOnline => "misc-online",
            MerchantCategory::MiscInPerson => "misc-in-person",
            MerchantCategory::PersonalCare => "personal-care",
            MerchantCategory::ShoppingOnline => "shopping-online",
            MerchantCategory::ShoppingInPerson => "shopping-in-person",
            MerchantCategory::Travel => "travel",
        }
    }

    /// Human label for tables.
    pub fn label(self) -> &'static str {
        match self {
            MerchantCategory::Entertainment => "Entertainment",
            MerchantCategory::FoodDining => "Food / dining",
            MerchantCategory::GasTransport => "Gas / transport",
            MerchantCategory::GroceryOnline => "Grocery online",
            MerchantCategory::GroceryInPerson => "Grocery in person",
            MerchantCategory::HealthFitness => "Health / fitness",
            MerchantCategory::Home => "Home",
            MerchantCategory::KidsPets => "Kids / pets",
            MerchantCategory::MiscOnline => "Misc online",
            MerchantCategory::MiscInPerson => "Misc in person",
            MerchantCategory::PersonalCare => "Personal care",
            MerchantCategory::ShoppingOnline => "Shopping online",
            MerchantCategory::ShoppingInPerson => "Shopping in person",
            MerchantCategory::Travel => "Travel",
        }
    }
}

impl fmt::Display for MerchantCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MerchantCategory {
    type Err = ParseCategoryError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .iter()
            .copied()
            .find(|c| c.name() == s)
            .ok_or_else(|| ParseCategoryError(s.to_string()))
    }
}

impl TryFrom<String> for MerchantCategory {
    type Error = ParseCategoryError;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<MerchantCategory> for String {
    fn from(c: MerchantCategory) -> Self {
        c.name().to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn indices_are_stable_and_distinct() {
        for (i, c) in MerchantCategory::ALL.iter().enumerate() {
            assert_eq!(c.index(), i);
            assert_eq!(MerchantCategory::from_index(i), Some(*c));
        }
        assert_eq!(MerchantCategory::from_index(14), None);
    }

    #[test]
    fn names_round_trip() {
        for c in MerchantCategory::ALL {
            assert_eq!(c.name().parse::<MerchantCategory>().unwrap(), c);
        }
        assert!("gambling".parse::<MerchantCategory>().is_err());
    }
}
