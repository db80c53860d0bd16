use alloc::vec::Vec;

use crate::map::{CardSet, CityId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PlayerCard {
    City(CityId),
    Epidemic,
}

/// Player draw pile kept as sub-stacks. Cards are stored bottom-first so the
/// top card is the last element; `sizes` lists sub-stack sizes bottom-first.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PlayerDeck {
    cards: Vec<PlayerCard>,
    sizes: Vec<u8>,
}

impl PlayerDeck {
    /// Builds a deck from sub-stacks listed top-first, each listed top-first.
    pub fn from_stacks_top_first(stacks: &[Vec<PlayerCard>]) -> PlayerDeck {
        let mut deck = PlayerDeck::default();
        for stack in stacks.iter().rev() {
            if stack.is_empty() {
                continue;
            }
            deck.cards.extend(stack.iter().rev().copied());
            deck.sizes.push(stack.len() as u8);
        }
        deck
    }

    /// Sub-stacks top-first, each listed top-first.
    pub fn stacks_top_first(&self) -> Vec<Vec<PlayerCard>> {
        let mut out = Vec::with_capacity(self.sizes.len());
        let mut end = self.cards.len();
        for &size in self.sizes.iter().rev() {
            let start = end - size as usize;
            out.push(self.cards[start..end].iter().rev().copied().collect());
            end = start;
        }
        out
    }

    /// Sub-stack sizes, top-first.
    pub fn stack_sizes_top_first(&self) -> Vec<usize> {
        self.sizes.iter().rev().map(|&s| s as usize).collect()
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.cards.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.cards.is_empty()
    }

    pub fn draw(&mut self) -> Option<PlayerCard> {
        let card = self.cards.pop()?;
        let last = self.sizes.last_mut().expect("sizes track cards");
        *last -= 1;
        if *last == 0 {
            self.sizes.pop();
        }
        Some(card)
    }

    pub fn city_cards(&self) -> CardSet {
        self.cards
            .iter()
            .filter_map(|c| match c {
                PlayerCard::City(id) => Some(*id),
                PlayerCard::Epidemic => None,
            })
            .collect()
    }

    pub fn epidemics_remaining(&self) -> usize {
        self.cards.iter().filter(|c| **c == PlayerCard::Epidemic).count()
    }

    /// Raw storage, bottom card first.
    pub fn cards_bottom_first(&self) -> &[PlayerCard] {
        &self.cards
    }

    pub(crate) fn raw_mut(&mut self) -> (&mut Vec<PlayerCard>, &Vec<u8>) {
        (&mut self.cards, &self.sizes)
    }
}

/// Infection draw pile as sub-stacks plus the face-up discard pile.
/// Same storage convention as [`PlayerDeck`].
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct InfectionDeck {
    cards: Vec<CityId>,
    sizes: Vec<u8>,
    pub discard: Vec<CityId>,
}

impl InfectionDeck {
    pub fn from_stacks_top_first(stacks: &[Vec<CityId>], discard: Vec<CityId>) -> InfectionDeck {
        let mut deck = InfectionDeck { discard, ..Default::default() };
        for stack in stacks.iter().rev() {
            if stack.is_empty() {
                continue;
            }
            deck.cards.extend(stack.iter().rev().copied());
            deck.sizes.push(stack.len() as u8);
        }
        deck
    }

    pub fn stacks_top_first(&self) -> Vec<Vec<CityId>> {
        let mut out = Vec::with_capacity(self.sizes.len());
        let mut end = self.cards.len();
        for &size in self.sizes.iter().rev() {
            let start = end - size as usize;
            out.push(self.cards[start..end].iter().rev().copied().collect());
            end = start;
        }
        out
    }

    /// Face-down cards, bottom first.
    pub fn cards(&self) -> &[CityId] {
        &self.cards
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.cards.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.cards.is_empty()
    }

    pub fn draw_top(&mut self) -> Option<CityId> {
        let card = self.cards.pop()?;
        let last = self.sizes.last_mut().expect("sizes track cards");
        *last -= 1;
        if *last == 0 {
            self.sizes.pop();
        }
        Some(card)
    }

    pub fn draw_bottom(&mut self) -> Option<CityId> {
        if self.cards.is_empty() {
            return None;
        }
        let card = self.cards.remove(0);
        self.sizes[0] -= 1;
        if self.sizes[0] == 0 {
            self.sizes.remove(0);
        }
        Some(card)
    }

    /// Places `cards` (listed bottom-first) on top as a new sub-stack.
    pub fn push_stack(&mut self, cards: &[CityId]) {
        if cards.is_empty() {
            return;
        }
        self.cards.extend_from_slice(cards);
        self.sizes.push(cards.len() as u8);
    }

    pub(crate) fn raw_mut(&mut self) -> (&mut Vec<CityId>, &Vec<u8>) {
        (&mut self.cards, &self.sizes)
    }
}
