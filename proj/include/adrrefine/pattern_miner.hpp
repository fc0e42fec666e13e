/*
 * @file pattern_miner.hpp
 *
 * This file is part of adrrefine
 *
 * Copyright 2026 The adrrefine Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace adrrefine {

using ItemId = std::uint32_t;
/// Sorted, duplicate-free item ids.
using Itemset = std::vector<ItemId>;

/// Code <-> id mapping. Ids follow lexicographic code order, so comparing id
/// sequences lexicographically is the same as comparing the code sequences.
class ItemDictionary {
public:
    ItemDictionary() = default;
    explicit ItemDictionary(std::vector<std::string> codes);

    std::size_t size() const noexcept { return codes_.size(); }
    const std::string &code(ItemId id) const { return codes_.at(id); }
    std::optional<ItemId> find(std::string_view code) const noexcept;

    /// Canonical itemset from codes; throws std::out_of_range on an unknown code.
    Itemset encode(std::span<const std::string> codes) const;
    std::vector<std::string> decode(std::span<const ItemId> items) const;

private:
    std::vector<std::string> codes_;
};

class TransactionDatabase {
public:
    TransactionDatabase() = default;
    TransactionDatabase(std::shared_ptr<const ItemDictionary> dictionary,
                        std::vector<Itemset> transactions);

    /// Builds a database whose dictionary covers exactly the codes present.
    static TransactionDatabase from_codes(const std::vector<std::vector<std::string>> &baskets);

    /// Builds two databases over one shared dictionary (needed to compare itemsets).
    static std::pair<TransactionDatabase, TransactionDatabase>
    from_codes_shared(const std::vector<std::vector<std::string>> &first,
                      const std::vector<std::vector<std::string>> &second);

    std::size_t size() const noexcept { return transactions_.size(); }
    const std::vector<Itemset> &transactions() const noexcept { return transactions_; }
    const ItemDictionary &dictionary() const noexcept { return *dictionary_; }
    const std::shared_ptr<const ItemDictionary> &shared_dictionary() const noexcept { return dictionary_; }

    /// Distinct items appearing in at least one transaction.
    std::vector<ItemId> item_universe() const;

private:
    std::shared_ptr<const ItemDictionary> dictionary_ = std::make_shared<ItemDictionary>();
    std::vector<Itemset> transactions_;
};

class MiningLimitError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Frequent itemsets with their exact transaction counts, stored flat and
/// sorted by (size, lexicographic items).
class ItemsetTable {
public:
    ItemsetTable() = default;

    std::size_t size() const noexcept { return counts_.size(); }
    std::span<const ItemId> itemset(std::size_t i) const noexcept {
        return {items_.data() + offsets_[i], offsets_[i + 1] - offsets_[i]};
    }
    std::uint32_t count(std::size_t i) const noexcept { return counts_[i]; }
    double support(std::size_t i) const noexcept {
        return static_cast<double>(counts_[i]) / static_cast<double>(n_transactions_);
    }

    std::optional<std::size_t> find(std::span<const ItemId> items) const noexcept;
    std::optional<double> support_of(std::span<const ItemId> items) const noexcept;

    double min_support() const noexcept { return min_support_; }
    std::size_t min_count() const noexcept { return min_count_; }
    std::size_t max_size() const noexcept { return max_size_; }
    std::size_t n_transactions() const noexcept { return n_transactions_; }

    /// Subset of this table frequent at a stricter threshold; equals mining
    /// again at that threshold.
    ItemsetTable restrict_to(double min_support) const;

    /// CSV `itemset;support`, codes joined by `|`.
    void write_csv(const std::filesystem::path &path, const ItemDictionary &dictionary) const;

private:
    friend class ItemsetTableBuilder;
    void build_index();

    std::vector<ItemId> items_;
    std::vector<std::uint32_t> offsets_{0};
    std::vector<std::uint32_t> counts_;
    std::vector<std::uint32_t> slots_; ///< open addressing, entry index + 1
    double min_support_ = 0.0;
    std::size_t min_count_ = 0;
    std::size_t max_size_ = 0;
    std::size_t n_transactions_ = 0;
};

/// Transaction count needed to be frequent: ceil(min_support * |D|), at least 1.
std::size_t min_count_for(double min_support, std::size_t n_transactions);

/// Fraction of transactions containing `items`; the empty set has support 1.
double support(std::span<const ItemId> items, const TransactionDatabase &db);

struct MiningOptions {
    double min_support = 0.001;
    std::size_t max_size = 5;
    std::size_t max_itemsets = 10'000'000;
};

/// All itemsets of size 1..max_size with count >= min_count_for(min_support, |D|).
/// Depth-first prefix extension over tid-lists: a candidate is only formed
/// from a frequent prefix, so infrequent subtrees are never visited.
ItemsetTable mine_frequent(const TransactionDatabase &db, const MiningOptions &options);

/// Bias-adjusted lift of `items` given its primary table (`t1`) and the
/// comparison table (`t2`):
///   (s1 + 1) / (s2 + 1)  if present in both,
///   s1 + 1               if present only in t1,
///   0                    otherwise.
double bias_lift(std::span<const ItemId> items, const ItemsetTable &t1, const ItemsetTable &t2);

enum class Direction { Positive, Negative };
std::string_view to_string(Direction d) noexcept;

struct EmergentPattern {
    Itemset itemset;
    std::vector<std::string> codes;
    double supp_d1 = 0.0; ///< exact support in the case database
    double supp_d2 = 0.0; ///< exact support in the control database
    std::optional<double> bias_lift_pos; ///< absent when not frequent in D1 at the primary threshold
    std::optional<double> bias_lift_neg; ///< absent when not frequent in D2 at the primary threshold
    Direction direction = Direction::Positive;

    double selected_lift() const noexcept {
        return (direction == Direction::Positive ? bias_lift_pos : bias_lift_neg).value_or(0.0);
    }
};

struct EmergentOptions {
    double minsup_primary = 0.001;
    double minsup_secondary = 0.0005;
    std::size_t max_size = 5;
    std::size_t min_itemset_size = 1;
    std::size_t k = 200;
    std::size_t max_itemsets = 10'000'000;
    /// Itemsets containing any of these codes are dropped before ranking.
    std::vector<std::string> excluded_codes;
};

struct EmergentResult {
    std::vector<EmergentPattern> positive;
    std::vector<EmergentPattern> negative;
    /// positive then negative, cross-direction duplicates kept once
    std::vector<EmergentPattern> selected;

    std::size_t frequent_d1_primary = 0;
    std::size_t frequent_d1_secondary = 0;
    std::size_t frequent_d2_primary = 0;
    std::size_t frequent_d2_secondary = 0;
    std::size_t positive_candidates = 0; ///< bias lift > 1 before top-k
    std::size_t negative_candidates = 0;
    std::size_t excluded_itemsets = 0;   ///< dropped for containing an excluded code

    ItemsetTable table_d1; ///< mined at the secondary threshold
    ItemsetTable table_d2;
};

/// `d1` holds case baskets, `d2` control baskets; both must share a dictionary.
EmergentResult emergent_patterns(const TransactionDatabase &d1, const TransactionDatabase &d2,
                                 const EmergentOptions &options);

/// CSV with columns itemset,supp_D1,supp_D2,biaslift_pos,biaslift_neg,direction.
void write_emergent_csv(const std::filesystem::path &path, std::span<const EmergentPattern> patterns);

} // namespace adrrefine
