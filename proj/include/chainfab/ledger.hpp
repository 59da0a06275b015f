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

#pragma once

#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "chainfab/transaction.hpp"

namespace chainfab {

enum class RequestStatus { Open, Accepted, Fulfilled, Expired };

std::string_view to_string(RequestStatus status);
std::optional<RequestStatus> parse_request_status(std::string_view name);

struct OfferRecord {
    Address provider;
    ServiceOfferPayload offer;
    bool operator==(const OfferRecord&) const = default;
};

struct RequestRecord {
    Address customer;
    ServiceRequestPayload payload;
    std::map<Digest256, OfferRecord> offers;
    RequestStatus status = RequestStatus::Open;
    std::optional<Digest256> accepted_offer;
    Amount escrow = 0;
    bool operator==(const RequestRecord&) const = default;
};

/// Replicated world state. Sum of balances plus sum of escrows always equals
/// genesis_supply + issued_supply.
struct LedgerState {
    std::map<Address, Amount> balances;
    std::map<Digest256, RequestRecord> requests;
    std::set<Digest256> seen_tx_ids;
    std::uint64_t height = 0;
    Amount issued_supply = 0;
    Amount genesis_supply = 0;

    [[nodiscard]] Amount balance(const Address& a) const;
    [[nodiscard]] Json to_json() const;
    [[nodiscard]] Digest256 state_hash() const { return canonical_hash(to_json()); }
    bool operator==(const LedgerState&) const = default;

    static LedgerState from_allocations(const std::map<Address, Amount>& allocations);
};

enum class TxError {
    UnknownRequest,
    UnknownOffer,
    RequestClosed,
    OverBudget,
    LateOffer,
    DuplicateOffer,
    NotCustomer,
    InsufficientFunds,
    ReplayedTransaction,
    BadSignature,
    BadCoinbase,
    InvalidField,
};

std::string_view to_string(TxError e);

struct TxRejection {
    TxError code;
    std::string detail;
};

/// Present only when the transaction under validation sits at position 0 of
/// a block; a coinbase is valid nowhere else.
struct CoinbaseSlot {
    std::uint64_t height = 0;
    Address miner;
    Amount reward = 0;
};

struct TxContext {
    UnixSeconds block_time = 0;
    std::optional<CoinbaseSlot> coinbase_slot;
};

// nullopt means the transaction is valid against state.
std::optional<TxRejection> validate_transaction(const LedgerState& state, const Transaction& tx,
                                                const TxContext& ctx);

// Precondition: validate_transaction returned nullopt for the same inputs.
LedgerState apply_transaction(LedgerState state, const Transaction& tx, const TxContext& ctx);
void apply_transaction_in_place(LedgerState& state, const Transaction& tx, const TxContext& ctx);

// Validate then apply; state is untouched on rejection.
std::optional<TxRejection> try_apply(LedgerState& state, const Transaction& tx, const TxContext& ctx);

/// OPEN requests with due_date strictly before block_time become EXPIRED.
LedgerState expire_requests(LedgerState state, UnixSeconds block_time);
void expire_requests_in_place(LedgerState& state, UnixSeconds block_time);

struct OfferCandidate {
    Digest256 offer_id;
    Address provider;
    ServiceOfferPayload offer;
};

class NoOffersError : public std::invalid_argument {
  public:
    NoOffersError() : std::invalid_argument("no offers to select from") {}
};

/// Cheapest offer; ties go to the earliest promised due date, then the
/// smallest offer id.
Digest256 select_offer(const std::vector<OfferCandidate>& offers);

/// Offers ordered the way select_offer ranks them.
std::vector<OfferCandidate> ranked_offers(const RequestRecord& record);

class UnknownRequestError : public std::out_of_range {
  public:
    explicit UnknownRequestError(const Digest256& id) : std::out_of_range("unknown request " + id.hex()) {}
};

struct RequestView {
    Digest256 request_id;
    RequestRecord record;
    [[nodiscard]] Json to_json() const;
};

RequestView request_status(const LedgerState& state, const Digest256& request_id);

// Balances plus escrows equal everything ever minted.
bool conservation_holds(const LedgerState& state);

}  // namespace chainfab
