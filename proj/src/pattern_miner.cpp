/*
 * @file pattern_miner.cpp
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
#include "adrrefine/pattern_miner.hpp"

#include "adrrefine/random.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <unordered_set>

namespace adrrefine {

ItemDictionary::ItemDictionary(std::vector<std::string> codes) : codes_{std::move(codes)} {
    std::sort(codes_.begin(), codes_.end());
    codes_.erase(std::unique(codes_.begin(), codes_.end()), codes_.end());
}

std::optional<ItemId> ItemDictionary::find(std::string_view code) const noexcept {
    auto it = std::lower_bound(codes_.begin(), codes_.end(), code);
    if (it == codes_.end() || *it != code) return std::nullopt;
    return static_cast<ItemId>(it - codes_.begin());
}

Itemset ItemDictionary::encode(std::span<const std::string> codes) const {
    Itemset out;
    out.reserve(codes.size());
    for (const auto &c : codes) {
        auto id = find(c);
        if (!id) throw std::out_of_range("unknown item code '" + c + "'");
        out.push_back(*id);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::vector<std::string> ItemDictionary::decode(std::span<const ItemId> items) const {
    std::vector<std::string> out;
    out.reserve(items.size());
    for (auto id : items) out.push_back(code(id));
    return out;
}

TransactionDatabase::TransactionDatabase(std::shared_ptr<const ItemDictionary> dictionary,
                                         std::vector<Itemset> transactions)
    : dictionary_{std::move(dictionary)}, transactions_{std::move(transactions)} {
    for (auto &t : transactions_) {
        std::sort(t.begin(), t.end());
        t.erase(std::unique(t.begin(), t.end()), t.end());
        if (!t.empty() && t.back() >= dictionary_->size()) {
            throw std::out_of_range("transaction item id outside the dictionary");
        }
    }
}

namespace {

std::vector<Itemset> encode_all(const ItemDictionary &dict, const std::vector<std::vector<std::string>> &baskets) {
    std::vector<Itemset> out;
    out.reserve(baskets.size());
    for (const auto &b : baskets) out.push_back(dict.encode(b));
    return out;
}

} // namespace

TransactionDatabase TransactionDatabase::from_codes(const std::vector<std::vector<std::string>> &baskets) {
    std::vector<std::string> all;
    for (const auto &b : baskets) all.insert(all.end(), b.begin(), b.end());
    auto dict = std::make_shared<const ItemDictionary>(std::move(all));
    return TransactionDatabase(dict, encode_all(*dict, baskets));
}

std::pair<TransactionDatabase, TransactionDatabase>
TransactionDatabase::from_codes_shared(const std::vector<std::vector<std::string>> &first,
                                       const std::vector<std::vector<std::string>> &second) {
    std::vector<std::string> all;
    for (const auto &b : first) all.insert(all.end(), b.begin(), b.end());
    for (const auto &b : second) all.insert(all.end(), b.begin(), b.end());
    auto dict = std::make_shared<const ItemDictionary>(std::move(all));
    return {TransactionDatabase(dict, encode_all(*dict, first)),
            TransactionDatabase(dict, encode_all(*dict, second))};
}

std::vector<ItemId> TransactionDatabase::item_universe() const {
    std::vector<char> seen(dictionary_->size(), 0);
    for (const auto &t : transactions_)
        for (auto id : t) seen[id] = 1;
    std::vector<ItemId> out;
    for (ItemId i = 0; i < seen.size(); ++i)
        if (seen[i]) out.push_back(i);
    return out;
}

namespace {

std::uint64_t hash_items(std::span<const ItemId> items) noexcept {
    std::uint64_t h = 0x84222325cbf29ce4ULL ^ items.size();
    for (auto id : items) h = mix64(h ^ id);
    return h;
}

bool lex_less(std::span<const ItemId> a, std::span<const ItemId> b) {
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

bool canonical_less(std::span<const ItemId> a, std::span<const ItemId> b) {
    if (a.size() != b.size()) return a.size() < b.size();
    return lex_less(a, b);
}

} // namespace

/// Accumulates itemsets in emission order and finalizes a canonical table.
class ItemsetTableBuilder {
public:
    ItemsetTableBuilder(double min_support, std::size_t min_count, std::size_t max_size,
                        std::size_t n_transactions, std::size_t limit)
        : limit_{limit} {
        table_.min_support_ = min_support;
        table_.min_count_ = min_count;
        table_.max_size_ = max_size;
        table_.n_transactions_ = n_transactions;
    }

    void add(std::span<const ItemId> items, std::uint32_t count) {
        if (table_.counts_.size() >= limit_) {
            throw MiningLimitError("frequent itemset count exceeds the cap of " + std::to_string(limit_) +
                                   "; raise min_support or lower max_size");
        }
        table_.items_.insert(table_.items_.end(), items.begin(), items.end());
        std::sort(table_.items_.end() - static_cast<std::ptrdiff_t>(items.size()), table_.items_.end());
        table_.offsets_.push_back(static_cast<std::uint32_t>(table_.items_.size()));
        table_.counts_.push_back(count);
    }

    ItemsetTable finish() {
        const std::size_t n = table_.counts_.size();
        std::vector<std::uint32_t> order(n);
        std::iota(order.begin(), order.end(), 0u);
        std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
            return canonical_less(table_.itemset(a), table_.itemset(b));
        });
        ItemsetTable out;
        out.min_support_ = table_.min_support_;
        out.min_count_ = table_.min_count_;
        out.max_size_ = table_.max_size_;
        out.n_transactions_ = table_.n_transactions_;
        out.items_.reserve(table_.items_.size());
        out.counts_.reserve(n);
        out.offsets_.reserve(n + 1);
        for (auto idx : order) {
            auto s = table_.itemset(idx);
            out.items_.insert(out.items_.end(), s.begin(), s.end());
            out.offsets_.push_back(static_cast<std::uint32_t>(out.items_.size()));
            out.counts_.push_back(table_.counts_[idx]);
        }
        out.build_index();
        return out;
    }

private:
    ItemsetTable table_;
    std::size_t limit_;
};

void ItemsetTable::build_index() {
    std::size_t cap = 16;
    while (cap < 2 * counts_.size() + 1) cap <<= 1;
    slots_.assign(cap, 0);
    const std::size_t mask = cap - 1;
    for (std::size_t i = 0; i < counts_.size(); ++i) {
        std::size_t pos = hash_items(itemset(i)) & mask;
        while (slots_[pos] != 0) pos = (pos + 1) & mask;
        slots_[pos] = static_cast<std::uint32_t>(i + 1);
    }
}

std::optional<std::size_t> ItemsetTable::find(std::span<const ItemId> items) const noexcept {
    if (slots_.empty()) return std::nullopt;
    const std::size_t mask = slots_.size() - 1;
    std::size_t pos = hash_items(items) & mask;
    while (slots_[pos] != 0) {
        const std::size_t idx = slots_[pos] - 1;
        auto s = itemset(idx);
        if (s.size() == items.size() && std::equal(s.begin(), s.end(), items.begin())) return idx;
        pos = (pos + 1) & mask;
    }
    return std::nullopt;
}

std::optional<double> ItemsetTable::support_of(std::span<const ItemId> items) const noexcept {
    if (auto idx = find(items)) return support(*idx);
    return std::nullopt;
}

ItemsetTable ItemsetTable::restrict_to(double min_support) const {
    const std::size_t min_count = min_count_for(min_support, n_transactions_);
    if (min_count < min_count_) {
        throw std::invalid_argument("restrict_to needs a threshold at least as strict as the mined one");
    }
    ItemsetTableBuilder builder(min_support, min_count, max_size_, n_transactions_, SIZE_MAX);
    for (std::size_t i = 0; i < size(); ++i) {
        if (counts_[i] >= min_count) builder.add(itemset(i), counts_[i]);
    }
    return builder.finish();
}

void ItemsetTable::write_csv(const std::filesystem::path &path, const ItemDictionary &dictionary) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << "itemset;support\n";
    out.precision(10);
    for (std::size_t i = 0; i < size(); ++i) {
        auto s = itemset(i);
        for (std::size_t k = 0; k < s.size(); ++k) out << (k ? "|" : "") << dictionary.code(s[k]);
        out << ';' << support(i) << '\n';
    }
    if (!out) throw std::runtime_error("I/O error writing " + path.string());
}

std::size_t min_count_for(double min_support, std::size_t n_transactions) {
    // guard against 0.3 * 10 evaluating to 3.0000000000000004
    const double raw = min_support * static_cast<double>(n_transactions);
    auto c = static_cast<std::size_t>(std::ceil(raw - 1e-9 * std::max(1.0, raw)));
    return std::max<std::size_t>(c, 1);
}

double support(std::span<const ItemId> items, const TransactionDatabase &db) {
    if (db.size() == 0) throw std::invalid_argument("support of an empty transaction database");
    if (items.empty()) return 1.0;
    std::size_t hits = 0;
    for (const auto &t : db.transactions()) {
        if (std::includes(t.begin(), t.end(), items.begin(), items.end())) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(db.size());
}

namespace {

struct TidNode {
    ItemId item;
    std::vector<std::uint32_t> tids;
};

/// Intersection with early exit once `min_count` is out of reach.
bool intersect(const std::vector<std::uint32_t> &a, const std::vector<std::uint32_t> &b,
               std::size_t min_count, std::vector<std::uint32_t> &out) {
    out.clear();
    std::size_t i = 0;
    std::size_t j = 0;
    while (i < a.size() && j < b.size()) {
        if (out.size() + std::min(a.size() - i, b.size() - j) < min_count) return false;
        if (a[i] < b[j]) ++i;
        else if (b[j] < a[i]) ++j;
        else {
            out.push_back(a[i]);
            ++i;
            ++j;
        }
    }
    return out.size() >= min_count;
}

void extend(std::vector<ItemId> &prefix, std::vector<TidNode> &siblings, std::size_t min_count,
            std::size_t max_size, ItemsetTableBuilder &builder) {
    std::vector<std::uint32_t> scratch;
    for (std::size_t i = 0; i < siblings.size(); ++i) {
        prefix.push_back(siblings[i].item);
        builder.add(prefix, static_cast<std::uint32_t>(siblings[i].tids.size()));
        if (prefix.size() < max_size) {
            std::vector<TidNode> children;
            for (std::size_t j = i + 1; j < siblings.size(); ++j) {
                if (intersect(siblings[i].tids, siblings[j].tids, min_count, scratch)) {
                    children.push_back({siblings[j].item, scratch});
                }
            }
            if (!children.empty()) extend(prefix, children, min_count, max_size, builder);
        }
        prefix.pop_back();
        // release memory of finished branches early
        std::vector<std::uint32_t>().swap(siblings[i].tids);
    }
}

} // namespace

ItemsetTable mine_frequent(const TransactionDatabase &db, const MiningOptions &options) {
    if (db.size() == 0) throw std::invalid_argument("cannot mine an empty transaction database");
    if (!(options.min_support > 0.0 && options.min_support <= 1.0)) {
        throw std::invalid_argument("min_support must lie in (0, 1]");
    }
    if (options.max_size < 1) throw std::invalid_argument("max_size must be at least 1");

    const std::size_t min_count = min_count_for(options.min_support, db.size());
    std::vector<std::vector<std::uint32_t>> tids(db.dictionary().size());
    for (std::uint32_t t = 0; t < db.size(); ++t) {
        for (auto id : db.transactions()[t]) tids[id].push_back(t);
    }
    std::vector<TidNode> roots;
    for (ItemId id = 0; id < tids.size(); ++id) {
        if (tids[id].size() >= min_count) roots.push_back({id, std::move(tids[id])});
    }
    // rarest items first keeps the deeper tid-lists short
    std::stable_sort(roots.begin(), roots.end(),
                     [](const TidNode &a, const TidNode &b) { return a.tids.size() < b.tids.size(); });

    ItemsetTableBuilder builder(options.min_support, min_count, options.max_size, db.size(),
                                options.max_itemsets);
    std::vector<ItemId> prefix;
    extend(prefix, roots, min_count, options.max_size, builder);
    return builder.finish();
}

double bias_lift(std::span<const ItemId> items, const ItemsetTable &t1, const ItemsetTable &t2) {
    const auto s1 = t1.support_of(items);
    if (!s1) return 0.0;
    if (const auto s2 = t2.support_of(items)) return (*s1 + 1.0) / (*s2 + 1.0);
    return *s1 + 1.0;
}

std::string_view to_string(Direction d) noexcept { return d == Direction::Positive ? "positive" : "negative"; }

namespace {

struct Candidate {
    std::size_t index; // into the primary table
    double lift;
    std::uint32_t count;
};

std::vector<Candidate> rank_candidates(const ItemsetTable &primary, const ItemsetTable &comparison,
                                       const std::vector<char> &excluded, std::size_t min_itemset_size,
                                       std::size_t &n_candidates, std::size_t &n_excluded) {
    std::vector<Candidate> out;
    for (std::size_t i = 0; i < primary.size(); ++i) {
        auto items = primary.itemset(i);
        if (items.size() < min_itemset_size) continue;
        if (std::any_of(items.begin(), items.end(), [&](ItemId id) { return excluded[id] != 0; })) {
            ++n_excluded;
            continue;
        }
        const double lift = bias_lift(items, primary, comparison);
        if (lift > 1.0) out.push_back({i, lift, primary.count(i)});
    }
    n_candidates = out.size();
    std::sort(out.begin(), out.end(), [&](const Candidate &a, const Candidate &b) {
        if (a.lift != b.lift) return a.lift > b.lift;
        if (a.count != b.count) return a.count > b.count;
        return lex_less(primary.itemset(a.index), primary.itemset(b.index));
    });
    return out;
}

} // namespace

EmergentResult emergent_patterns(const TransactionDatabase &d1, const TransactionDatabase &d2,
                                 const EmergentOptions &options) {
    if (d1.shared_dictionary() != d2.shared_dictionary()) {
        throw std::invalid_argument("case and control databases must share an item dictionary");
    }
    if (!(options.minsup_primary > 0.0 && options.minsup_primary <= 1.0) ||
        !(options.minsup_secondary > 0.0 && options.minsup_secondary <= options.minsup_primary)) {
        throw std::invalid_argument("need 0 < minsup_secondary <= minsup_primary <= 1");
    }
    if (options.k < 1) throw std::invalid_argument("k must be at least 1");

    const MiningOptions secondary{options.minsup_secondary, options.max_size, options.max_itemsets};
    ItemsetTable t1s = mine_frequent(d1, secondary);
    ItemsetTable t2s = mine_frequent(d2, secondary);
    const ItemsetTable t1p = t1s.restrict_to(options.minsup_primary);
    const ItemsetTable t2p = t2s.restrict_to(options.minsup_primary);

    const ItemDictionary &dict = d1.dictionary();
    std::vector<char> excluded(dict.size(), 0);
    for (const auto &code : options.excluded_codes) {
        if (auto id = dict.find(code)) excluded[*id] = 1;
    }

    EmergentResult result;
    result.frequent_d1_primary = t1p.size();
    result.frequent_d1_secondary = t1s.size();
    result.frequent_d2_primary = t2p.size();
    result.frequent_d2_secondary = t2s.size();

    auto make_pattern = [&](std::span<const ItemId> items, Direction direction) {
        EmergentPattern p;
        p.itemset.assign(items.begin(), items.end());
        p.codes = dict.decode(items);
        p.supp_d1 = support(items, d1);
        p.supp_d2 = support(items, d2);
        if (t1p.find(items)) p.bias_lift_pos = bias_lift(items, t1p, t2s);
        if (t2p.find(items)) p.bias_lift_neg = bias_lift(items, t2p, t1s);
        p.direction = direction;
        return p;
    };

    std::size_t excluded_pos = 0;
    std::size_t excluded_neg = 0;
    const auto pos = rank_candidates(t1p, t2s, excluded, options.min_itemset_size,
                                     result.positive_candidates, excluded_pos);
    const auto neg = rank_candidates(t2p, t1s, excluded, options.min_itemset_size,
                                     result.negative_candidates, excluded_neg);
    result.excluded_itemsets = excluded_pos + excluded_neg;

    for (std::size_t i = 0; i < std::min(options.k, pos.size()); ++i) {
        result.positive.push_back(make_pattern(t1p.itemset(pos[i].index), Direction::Positive));
    }
    for (std::size_t i = 0; i < std::min(options.k, neg.size()); ++i) {
        result.negative.push_back(make_pattern(t2p.itemset(neg[i].index), Direction::Negative));
    }

    // Cross-direction duplicates keep the direction with the larger lift.
    auto find_in = [](const std::vector<EmergentPattern> &list, const Itemset &items) {
        return std::find_if(list.begin(), list.end(), [&](const EmergentPattern &p) { return p.itemset == items; });
    };
    for (const auto &p : result.positive) {
        auto other = find_in(result.negative, p.itemset);
        if (other != result.negative.end() && other->selected_lift() > p.selected_lift()) continue;
        result.selected.push_back(p);
    }
    for (const auto &p : result.negative) {
        auto other = find_in(result.positive, p.itemset);
        if (other != result.positive.end() && other->selected_lift() >= p.selected_lift()) continue;
        result.selected.push_back(p);
    }
    result.table_d1 = std::move(t1s);
    result.table_d2 = std::move(t2s);
    return result;
}

void write_emergent_csv(const std::filesystem::path &path, std::span<const EmergentPattern> patterns) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out.precision(10);
    out << "itemset,supp_D1,supp_D2,biaslift_pos,biaslift_neg,direction\n";
    for (const auto &p : patterns) {
        for (std::size_t k = 0; k < p.codes.size(); ++k) out << (k ? "|" : "") << p.codes[k];
        out << ',' << p.supp_d1 << ',' << p.supp_d2 << ',';
        if (p.bias_lift_pos) out << *p.bias_lift_pos;
        out << ',';
        if (p.bias_lift_neg) out << *p.bias_lift_neg;
        out << ',' << to_string(p.direction) << '\n';
    }
    if (!out) throw std::runtime_error("I/O error writing " + path.string());
}

} // namespace adrrefine
