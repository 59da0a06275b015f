/*
   Copyright 2026 The Chainfab Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

#include "chainfab/ledger.hpp"

#include <algorithm>
#include <array>

namespace chainfab {

namespace {

constexpr std::array<std::string_view, 4> kStatusNames = {"OPEN", "ACCEPTED", "FULFILLED", "EXPIRED"};

constexpr std::size_t kMaxTagLength = 64;
constexpr std::size_t kMaxSpecLength = 4096;

std::optional<TxRejection> reject(TxError code, std::string detail) {
    return TxRejection{code, std::move(detail)};
}

const RequestRecord* find_request(const LedgerState& state, const Digest256& id) {
    auto it = state.requests.find(id);
    return it == state.requests.end() ? nullptr : &it->second;
}

std::optional<TxRejection> check_payload(const LedgerState& state, const Transaction& tx, const Address& signer,
                                         const TxContext& ctx) {
    if (const auto* p = tx.as<ServiceRequestPayload>()) {
        if (p->max_price <= 0) return reject(TxError::InvalidField, "max_price must be positive");
        if (p->due_date <= 0 || p->due_date <= ctx.block_time) {
            return reject(TxError::InvalidField, "due_date must lie after the block time");
        }
        if (p->process_tag.empty() || p->process_tag.size() > kMaxTagLength) {
            return reject(TxError::InvalidField, "process_tag must be 1..64 characters");
        }
        if (p->product_spec.size() > kMaxSpecLength) {
            return reject(TxError::InvalidField, "product_spec longer than 4096 bytes");
        }
        return std::nullopt;
    }
    if (const auto* p = tx.as<ServiceOfferPayload>()) {
        if (p->quoted_price <= 0) return reject(TxError::InvalidField, "quoted_price must be positive");
        const auto* req = find_request(state, p->request_id);
        if (!req) return reject(TxError::UnknownRequest, p->request_id.hex());
        if (req->status != RequestStatus::Open) {
            return reject(TxError::RequestClosed, "request is " + std::string(to_string(req->status)));
        }
        if (p->quoted_price > req->payload.max_price) {
            return reject(TxError::OverBudget, "quoted_price exceeds max_price " + std::to_string(req->payload.max_price));
        }
        if (p->promised_due_date > req->payload.due_date) {
            return reject(TxError::LateOffer, "promised_due_date is after the requested due_date");
        }
        for (const auto& [id, offer] : req->offers) {
            if (offer.provider == signer) return reject(TxError::DuplicateOffer, "provider already offered");
        }
        return std::nullopt;
    }
    if (const auto* p = tx.as<OfferAcceptancePayload>()) {
        const auto* req = find_request(state, p->request_id);
        if (!req) return reject(TxError::UnknownRequest, p->request_id.hex());
        if (req->status != RequestStatus::Open) {
            return reject(TxError::RequestClosed, "request is " + std::string(to_string(req->status)));
        }
        auto offer = req->offers.find(p->offer_id);
        if (offer == req->offers.end()) return reject(TxError::UnknownOffer, p->offer_id.hex());
        if (signer != req->customer) return reject(TxError::NotCustomer, "only the customer may accept");
        if (state.balance(signer) < offer->second.offer.quoted_price) {
            return reject(TxError::InsufficientFunds, "balance " + std::to_string(state.balance(signer)) +
                                                          " below price " +
                                                          std::to_string(offer->second.offer.quoted_price));
        }
        return std::nullopt;
    }
    if (const auto* p = tx.as<DeliveryConfirmationPayload>()) {
        const auto* req = find_request(state, p->request_id);
        if (!req) return reject(TxError::UnknownRequest, p->request_id.hex());
        if (req->status != RequestStatus::Accepted) {
            return reject(TxError::RequestClosed, "request is " + std::string(to_string(req->status)));
        }
        if (signer != req->customer) return reject(TxError::NotCustomer, "only the customer may confirm");
        return std::nullopt;
    }
    if (const auto* p = tx.as<TransferPayload>()) {
        if (p->amount <= 0) return reject(TxError::InvalidField, "amount must be positive");
        if (state.balance(signer) < p->amount) {
            return reject(TxError::InsufficientFunds, "balance " + std::to_string(state.balance(signer)));
        }
        return std::nullopt;
    }
    return reject(TxError::InvalidField, "unsupported payload");
}

}  // namespace

std::string_view to_string(RequestStatus status) { return kStatusNames.at(static_cast<std::size_t>(status)); }

std::optional<RequestStatus> parse_request_status(std::string_view name) {
    for (std::size_t i = 0; i < kStatusNames.size(); ++i) {
        if (kStatusNames[i] == name) return static_cast<RequestStatus>(i);
    }
    return std::nullopt;
}

std::string_view to_string(TxError e) {
    static constexpr std::array<std::string_view, 12> names = {
        "UnknownRequest",      "UnknownOffer", "RequestClosed", "OverBudget",  "LateOffer",   "DuplicateOffer",
        "NotCustomer", "InsufficientFunds", "ReplayedTransaction", "BadSignature", "BadCoinbase", "InvalidField",
    };
    return names.at(static_cast<std::size_t>(e));
}

Amount LedgerState::balance(const Address& a) const {
    auto it = balances.find(a);
    return it == balances.end() ? 0 : it->second;
}

Json LedgerState::to_json() const {
    Json bal = Json::object();
    for (const auto& [addr, amount] : balances) bal[addr.to_string()] = amount;
    Json reqs = Json::object();
    for (const auto& [id, r] : requests) reqs[id.hex()] = RequestView{id, r}.to_json();
    Json seen = Json::array();
    for (const auto& id : seen_tx_ids) seen.push_back(id.hex());
    return Json{{"balances", bal},         {"requests", reqs},
                {"seen_tx_ids", seen},     {"height", height},
                {"issued_supply", issued_supply}, {"genesis_supply", genesis_supply}};
}

LedgerState LedgerState::from_allocations(const std::map<Address, Amount>& allocations) {
    LedgerState s;
    for (const auto& [addr, amount] : allocations) {
        if (amount < 0) throw std::invalid_argument("negative genesis allocation");
        s.balances[addr] = amount;
        s.genesis_supply += amount;
    }
    return s;
}

std::optional<TxRejection> validate_transaction(const LedgerState& state, const Transaction& tx,
                                                const TxContext& ctx) {
    auto id = tx.id();
    if (tx.kind() == TxKind::Coinbase) {
        if (tx.sender_public || tx.signature) return reject(TxError::BadCoinbase, "coinbase must be unsigned");
        if (!ctx.coinbase_slot) return reject(TxError::BadCoinbase, "coinbase outside block position 0");
        const auto& cb = std::get<CoinbasePayload>(tx.payload);
        const auto& slot = *ctx.coinbase_slot;
        if (cb.height != slot.height) return reject(TxError::BadCoinbase, "coinbase height mismatch");
        if (cb.miner != slot.miner) return reject(TxError::BadCoinbase, "coinbase pays someone other than the miner");
        if (cb.amount != slot.reward) {
            return reject(TxError::BadCoinbase, "coinbase amount " + std::to_string(cb.amount) + " != reward " +
                                                    std::to_string(slot.reward));
        }
        if (state.seen_tx_ids.contains(id)) return reject(TxError::ReplayedTransaction, id.hex());
        return std::nullopt;
    }
    if (!tx.signature_valid()) return reject(TxError::BadSignature, "signature does not verify");
    if (state.seen_tx_ids.contains(id)) return reject(TxError::ReplayedTransaction, id.hex());
    return check_payload(state, tx, *tx.sender(), ctx);
}

void apply_transaction_in_place(LedgerState& state, const Transaction& tx, const TxContext& /*ctx*/) {
    auto id = tx.id();
    state.seen_tx_ids.insert(id);
    if (const auto* p = tx.as<CoinbasePayload>()) {
        state.balances[p->miner] += p->amount;
        state.issued_supply += p->amount;
        return;
    }
    const Address signer = *tx.sender();
    if (const auto* p = tx.as<ServiceRequestPayload>()) {
        RequestRecord rec;
        rec.customer = signer;
        rec.payload = *p;
        state.requests.emplace(id, std::move(rec));
    } else if (const auto* p = tx.as<ServiceOfferPayload>()) {
        state.requests.at(p->request_id).offers.emplace(id, OfferRecord{signer, *p});
    } else if (const auto* p = tx.as<OfferAcceptancePayload>()) {
        auto& rec = state.requests.at(p->request_id);
        Amount price = rec.offers.at(p->offer_id).offer.quoted_price;
        state.balances[rec.customer] -= price;
        rec.escrow = price;
        rec.status = RequestStatus::Accepted;
        rec.accepted_offer = p->offer_id;
    } else if (const auto* p = tx.as<DeliveryConfirmationPayload>()) {
        auto& rec = state.requests.at(p->request_id);
        const auto& provider = rec.offers.at(*rec.accepted_offer).provider;
        state.balances[provider] += rec.escrow;
        rec.escrow = 0;
        rec.status = RequestStatus::Fulfilled;
    } else if (const auto* p = tx.as<TransferPayload>()) {
        state.balances[signer] -= p->amount;
        state.balances[p->to] += p->amount;
    }
}

LedgerState apply_transaction(LedgerState state, const Transaction& tx, const TxContext& ctx) {
    apply_transaction_in_place(state, tx, ctx);
    return state;
}

std::optional<TxRejection> try_apply(LedgerState& state, const Transaction& tx, const TxContext& ctx) {
    auto verdict = validate_transaction(state, tx, ctx);
    if (!verdict) apply_transaction_in_place(state, tx, ctx);
    return verdict;
}

void expire_requests_in_place(LedgerState& state, UnixSeconds block_time) {
    for (auto& [id, rec] : state.requests) {
        if (rec.status == RequestStatus::Open && rec.payload.due_date < block_time) rec.status = RequestStatus::Expired;
    }
}

LedgerState expire_requests(LedgerState state, UnixSeconds block_time) {
    expire_requests_in_place(state, block_time);
    return state;
}

namespace {

bool ranks_before(const OfferCandidate& a, const OfferCandidate& b) {
    if (a.offer.quoted_price != b.offer.quoted_price) return a.offer.quoted_price < b.offer.quoted_price;
    if (a.offer.promised_due_date != b.offer.promised_due_date) {
        return a.offer.promised_due_date < b.offer.promised_due_date;
    }
    return a.offer_id < b.offer_id;
}

}  // namespace

Digest256 select_offer(const std::vector<OfferCandidate>& offers) {
    if (offers.empty()) throw NoOffersError();
    return std::min_element(offers.begin(), offers.end(), ranks_before)->offer_id;
}

std::vector<OfferCandidate> ranked_offers(const RequestRecord& record) {
    std::vector<OfferCandidate> out;
    for (const auto& [id, o] : record.offers) out.push_back({id, o.provider, o.offer});
    std::sort(out.begin(), out.end(), ranks_before);
    return out;
}

Json RequestView::to_json() const {
    Json offers = Json::object();
    for (const auto& [id, o] : record.offers) {
        offers[id.hex()] = Json{{"provider", o.provider.to_string()},
                                {"quoted_price", o.offer.quoted_price},
                                {"promised_due_date", o.offer.promised_due_date}};
    }
    return Json{{"request_id", request_id.hex()},
                {"customer", record.customer.to_string()},
                {"product_spec", record.payload.product_spec},
                {"process_tag", record.payload.process_tag},
                {"due_date", record.payload.due_date},
                {"max_price", record.payload.max_price},
                {"offers", offers},
                {"status", std::string(to_string(record.status))},
                {"accepted_offer", record.accepted_offer ? Json(record.accepted_offer->hex()) : Json(nullptr)},
                {"escrow", record.escrow}};
}

RequestView request_status(const LedgerState& state, const Digest256& request_id) {
    auto it = state.requests.find(request_id);
    if (it == state.requests.end()) throw UnknownRequestError(request_id);
    return RequestView{request_id, it->second};
}

bool conservation_holds(const LedgerState& state) {
    Amount total = 0;
    for (const auto& [addr, amount] : state.balances) {
        if (amount < 0) return false;
        total += amount;
    }
    for (const auto& [id, rec] : state.requests) {
        if (rec.escrow < 0) return false;
        if ((rec.escrow > 0) != (rec.status == RequestStatus::Accepted)) return false;
        total += rec.escrow;
    }
    return total == state.genesis_supply + state.issued_supply;
}

}  // namespace chainfab
