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

#include "chainfab/transaction.hpp"

#include <array>

namespace chainfab {

namespace {

constexpr std::array<std::string_view, 6> kKindNames = {
    "ServiceRequest", "ServiceOffer", "OfferAcceptance", "DeliveryConfirmation", "Transfer", "Coinbase",
};

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

}  // namespace

TxPayload payload_from_json(TxKind kind, const Json& p) {
    namespace jf = json_field;
    switch (kind) {
        case TxKind::ServiceRequest:
            jf::expect_keys(p, {"due_date", "max_price", "process_tag", "product_spec"});
            return ServiceRequestPayload{jf::string(p, "product_spec"), jf::string(p, "process_tag"),
                                         jf::int64(p, "due_date"), jf::int64(p, "max_price")};
        case TxKind::ServiceOffer:
            jf::expect_keys(p, {"promised_due_date", "quoted_price", "request_id"});
            return ServiceOfferPayload{jf::fixed<Digest256>(p, "request_id"), jf::int64(p, "quoted_price"),
                                       jf::int64(p, "promised_due_date")};
        case TxKind::OfferAcceptance:
            jf::expect_keys(p, {"offer_id", "request_id"});
            return OfferAcceptancePayload{jf::fixed<Digest256>(p, "request_id"), jf::fixed<Digest256>(p, "offer_id")};
        case TxKind::DeliveryConfirmation:
            jf::expect_keys(p, {"request_id"});
            return DeliveryConfirmationPayload{jf::fixed<Digest256>(p, "request_id")};
        case TxKind::Transfer:
            jf::expect_keys(p, {"amount", "memo", "to"});
            return TransferPayload{jf::address(p, "to"), jf::int64(p, "amount"), jf::string(p, "memo")};
        case TxKind::Coinbase:
            jf::expect_keys(p, {"amount", "height", "miner"});
            return CoinbasePayload{jf::uint64(p, "height"), jf::address(p, "miner"), jf::int64(p, "amount")};
    }
    throw DecodeError("unknown transaction kind");
}

std::string_view to_string(TxKind kind) { return kKindNames.at(static_cast<std::size_t>(kind)); }

std::optional<TxKind> parse_tx_kind(std::string_view name) {
    for (std::size_t i = 0; i < kKindNames.size(); ++i) {
        if (kKindNames[i] == name) return static_cast<TxKind>(i);
    }
    return std::nullopt;
}

Json payload_to_json(const TxPayload& payload) {
    return std::visit(
        overloaded{
            [](const ServiceRequestPayload& p) {
                return Json{{"product_spec", p.product_spec},
                            {"process_tag", p.process_tag},
                            {"due_date", p.due_date},
                            {"max_price", p.max_price}};
            },
            [](const ServiceOfferPayload& p) {
                return Json{{"request_id", p.request_id.hex()},
                            {"quoted_price", p.quoted_price},
                            {"promised_due_date", p.promised_due_date}};
            },
            [](const OfferAcceptancePayload& p) {
                return Json{{"request_id", p.request_id.hex()}, {"offer_id", p.offer_id.hex()}};
            },
            [](const DeliveryConfirmationPayload& p) { return Json{{"request_id", p.request_id.hex()}}; },
            [](const TransferPayload& p) {
                return Json{{"to", p.to.to_string()}, {"amount", p.amount}, {"memo", p.memo}};
            },
            [](const CoinbasePayload& p) {
                return Json{{"height", p.height}, {"miner", p.miner.to_string()}, {"amount", p.amount}};
            },
        },
        payload);
}

std::optional<Address> Transaction::sender() const {
    if (!sender_public) return std::nullopt;
    return derive_address(*sender_public);
}

Json Transaction::to_json() const {
    Json j{{"kind", std::string(to_string(kind()))}, {"payload", payload_to_json(payload)}};
    if (sender_public) j["sender_public"] = sender_public->hex();
    if (signature) j["signature"] = signature->hex();
    return j;
}

Transaction Transaction::from_json(const Json& j) {
    namespace jf = json_field;
    auto kind = parse_tx_kind(jf::string(j, "kind"));
    if (!kind) throw DecodeError("unknown transaction kind \"" + jf::string(j, "kind") + "\"");
    Transaction tx;
    tx.payload = payload_from_json(*kind, jf::require(j, "payload"));
    if (*kind == TxKind::Coinbase) {
        jf::expect_keys(j, {"kind", "payload"});
    } else {
        jf::expect_keys(j, {"kind", "payload", "sender_public", "signature"});
        tx.sender_public = jf::fixed<PublicKey>(j, "sender_public");
        tx.signature = jf::fixed<Signature>(j, "signature");
    }
    return tx;
}

std::string Transaction::signing_preimage() const {
    Json j = to_json();
    j.erase("signature");
    return canonical_encode(j);
}

bool Transaction::signature_valid() const {
    if (!sender_public || !signature) return false;
    return verify_signature(*sender_public, as_bytes(signing_preimage()), *signature);
}

Transaction make_signed(const KeyPair& key, TxPayload payload) {
    Transaction tx;
    tx.payload = std::move(payload);
    tx.sender_public = key.public_key;
    tx.signature = sign(key, tx.signing_preimage());
    return tx;
}

Transaction make_coinbase(std::uint64_t height, const Address& miner, Amount amount) {
    Transaction tx;
    tx.payload = CoinbasePayload{height, miner, amount};
    return tx;
}

}  // namespace chainfab
