"""Regenerate the packaged golden fixture table.

Run from the repo root:

    python3 tools/make_golden_fixtures.py

The table maps "Agent/Action/step" request keys to scripted replies for
the default insurance-management run, plus the step-2 replies used by the
feedback-loop and config-variant scenarios.
"""

import json
from pathlib import Path

OUT = Path(__file__).resolve().parent.parent / "src" / "reqforge" / "data" / "fixtures" / "golden.json"

F = {}

# -- research and interview preparation --------------------------------------

F["Interviewer/ConductResearch/1"] = """\
# Product Analysis Report

## Background

The client wants an insurance management system: a back-office platform for
an insurance provider that handles the full lifecycle of policies, from
quotation and underwriting through renewal, claims, and billing. Today the
client coordinates this work across spreadsheets and a legacy desktop tool,
which causes duplicated customer records and slow claim turnaround.

## Related Products

Established platforms in this space include Guidewire PolicyCenter,
Duck Creek Policy, and Applied Epic. They share a common core: a policy
administration module, a claims workbench, customer and agent portals, and
reporting. Smaller agencies often use lighter tools that focus on customer
relationship tracking and commission handling rather than full policy
administration.

## Candidate Features

- Policy lifecycle management: quote, issue, endorse, renew, cancel.
- Claims intake and adjudication with status tracking.
- Customer and agent record management with deduplication.
- Premium billing, payment tracking, and overdue notices.
- Role-based access for agents, adjusters, and administrators.
- Operational reporting: loss ratios, renewal rates, outstanding claims.
"""

F["Interviewer/PrepareInterviewList/1"] = """\
# Interview Question List

1. Which insurance lines (for example property, auto, life) must the system manage?
2. Who are the day-to-day users, and what roles and permissions do they need?
3. Walk me through how a new policy is created and approved today.
4. How are claims reported, assessed, and settled in the current process?
5. What billing arrangements must be supported (installments, direct debit, invoicing)?
6. Which existing systems or data sources must the new system integrate with?
7. What volumes should we plan for: policies in force, claims per month, concurrent users?
8. What regulatory or audit requirements constrain how records are stored?
9. What reports does management rely on at month end?
10. What would make this project a clear success one year after launch?
"""

# -- interview turns (7 rounds, no early termination) -------------------------

F["Interviewer/StartInterview/1"] = """\
Thank you for taking the time. To anchor the scope: which insurance lines
should the system manage at launch, and roughly how large is the portfolio
(policies in force, monthly new business, claims per month)?"""

F["EndUser/StartRespond/1"] = """\
We are a property and casualty insurer. At launch we need auto and home
policies; commercial property should follow within a year. We have about
42,000 policies in force, write around 900 new policies a month, and see
roughly 350 claims a month. Peak usage is about 60 staff online at once."""

F["Interviewer/StartInterview/2"] = """\
That helps size things. Based on similar platforms, I would recommend
role-based access with separate profiles for agents, underwriters, claims
adjusters, billing staff, and administrators. Does that match the roles in
your organisation, and are there approval steps tied to specific roles?"""

F["EndUser/RespondToRecommend/1"] = """\
Yes, those five roles cover us. Two constraints: policies above a premium
threshold need a second underwriter approval before issue, and only claims
adjusters may change a claim reserve. Administrators manage user accounts
but must not be able to edit financial records."""

F["Interviewer/StartInterview/3"] = """\
Understood. For policy lifecycle, a common pattern is quote, bind, issue,
endorse, renew, cancel, with each transition recorded for audit. Should the
system generate renewal offers automatically, and how far ahead of expiry
do you contact customers?"""

F["EndUser/RespondToRecommend/2"] = """\
Automatic renewal offers are essential. We prepare renewals 45 days before
expiry, send the offer at 30 days, and follow up at 14 days if unanswered.
Agents can adjust the renewal premium within a band set by underwriting;
anything outside that band goes back to an underwriter."""

F["Interviewer/StartInterview/4"] = """\
On claims: I would suggest a claims intake form that links to the policy,
automatic coverage verification, reserve tracking, and a settlement step
with payment authorisation. How do claims arrive today, and who needs to
see status updates?"""

F["EndUser/RespondToRecommend/3"] = """\
Claims arrive by phone and through our website form; both end up re-keyed
into the legacy tool, which we want to stop. Intake should capture incident
details, verify coverage against the policy, and open a claim file. The
customer, their agent, and the assigned adjuster all need to see status.
Settlements above 25,000 need a claims manager sign-off."""

F["Interviewer/StartInterview/5"] = """\
For billing, the usual options are annual up front, semi-annual, and
monthly installments with direct debit, plus automatic reminders on missed
payments. Which of these do you need, and how should overdue policies be
handled?"""

F["EndUser/RespondToRecommend/4"] = """\
We bill annually and monthly; semi-annual is rare but exists for some
commercial accounts, so keep it. Direct debit and card payments are both
used. If a payment is missed we send a reminder at 7 days, a formal notice
at 21 days, and suspend cover at 30 days. Suspension and reinstatement must
be logged with timestamps for the regulator."""

F["Interviewer/StartInterview/6"] = """\
Let me reflect back what I have so far: auto and home lines at launch with
commercial to follow; five staff roles with threshold-based approvals; a
full policy lifecycle with automated renewal offers at 30 days; claims
intake with coverage verification, reserves, and manager sign-off above
25,000; and billing with annual, semi-annual, and monthly schedules plus a
7/21/30 day overdue ladder. Have I missed anything important about how the
work flows between these areas?"""

F["EndUser/RespondToReflection/1"] = """\
That summary is accurate. One addition: customer records must be shared
across policies and claims, so a change of address made during a claim call
updates the policy record too. Duplicate customer records are a real pain
today. Also, every document we send (offers, notices, settlement letters)
must be stored against the customer file."""

F["Interviewer/StartInterview/7"] = """\
Final reflection: beyond the functional flow, we have audit logging for
status changes, regulator-ready records for suspension events, document
storage on the customer file, and deduplicated customer records shared
across modules. Are there performance, availability, or data protection
expectations we should write down as explicit requirements before I draft
the requirements list?"""

F["EndUser/RespondToReflection/2"] = """\
Yes, three things. Screens used in call handling must respond within two
seconds so staff are not waiting while a customer is on the line. The
system must be available during business hours with planned maintenance
outside them; a half-day outage would stop the whole office. And customer
data must be encrypted at rest and accessible only per role, since we hold
identity and bank details. Those are hard requirements for us."""

# -- post-interview documents --------------------------------------------------

F["Interviewer/WriteReqList/1"] = """\
# User Requirements List

## Functional Requirements

- REQ-1: The system shall manage auto and home insurance policies through their full lifecycle: quote, bind, issue, endorse, renew, and cancel, recording each transition.
- REQ-2: The system shall provide role-based access for agents, underwriters, claims adjusters, billing staff, and administrators, with permissions scoped per role.
- REQ-3: The system shall require a second underwriter approval before issuing any policy whose premium exceeds a configurable threshold.
- REQ-4: The system shall generate renewal offers 30 days before policy expiry, with preparation visible to staff at 45 days and an automatic follow-up at 14 days.
- REQ-5: The system shall capture claims at intake with incident details, verify coverage against the linked policy, and open a tracked claim file visible to the customer, agent, and adjuster.
- REQ-6: The system shall restrict claim reserve changes to claims adjusters and require claims manager sign-off for settlements above 25,000.
- REQ-7: The system shall support annual, semi-annual, and monthly billing with direct debit and card payment, applying reminders at 7 days, formal notice at 21 days, and cover suspension at 30 days overdue.
- REQ-8: The system shall maintain a single deduplicated customer record shared across policies and claims, so contact changes propagate everywhere, and shall store all outbound documents against the customer file.

## Quality Requirements

- REQ-9: Screens used in call handling shall respond within two seconds, and the system shall be available throughout business hours with maintenance scheduled outside them.
- REQ-10: Customer data shall be encrypted at rest, access shall follow role permissions, and suspension or reinstatement events shall be logged with timestamps suitable for regulatory audit.
"""

F["Interviewer/WriteInterviewRecord/1"] = """\
# Interview Record

## Participants and Setting

Interviewer and the end user representative (operations lead at a property
and casualty insurer), seven rounds of structured dialogue.

## Key Findings

1. Scope at launch is auto and home lines, roughly 42,000 policies in
   force, 900 new policies and 350 claims per month, about 60 concurrent
   staff.
2. Five staff roles were confirmed. High-premium policies need dual
   underwriter approval; reserve changes are adjuster-only; administrators
   must not edit financial records.
3. Renewals follow a 45/30/14 day ladder and agents may reprice within an
   underwriting band.
4. Claims arrive by phone and web form; intake must verify coverage and
   open a shared-visibility claim file; settlements above 25,000 need
   manager sign-off.
5. Billing covers annual, semi-annual, and monthly schedules with a
   7/21/30 day overdue ladder; suspension events are regulator-relevant.
6. Customer records must be deduplicated and shared across modules, with
   all outbound documents filed against the customer.
7. Hard quality constraints: two-second response on call-handling screens,
   business-hours availability, encryption at rest, role-scoped access,
   and timestamped audit logs.

## Open Points

Commercial property is a fast-follow line and should be kept in mind in
data model decisions, but it is out of scope for the first release.
"""

F["Deployer/WriteRunEnv/1"] = """\
# Operating Environment List

## Hardware

- Application servers: two virtual machines, 8 vCPU and 32 GB RAM each, behind a load balancer.
- Database server: one primary with a warm standby, 16 vCPU, 64 GB RAM, SSD storage sized for 5 years of policy and claims data.
- Office workstations access the system through current Chrome or Edge browsers; no desktop installation.

## Software

- Server OS: Ubuntu 22.04 LTS.
- Runtime: containerised services on Docker with a PostgreSQL 15 database.
- Document storage: S3-compatible object store for generated offers, notices, and settlement letters.
- Authentication via the company single sign-on (OpenID Connect).

## Network

- HTTPS only, TLS 1.2 or newer, internal traffic on a private subnet.
- Direct debit submissions leave through the existing SFTP gateway to the payment bureau.
- Web claim intake is exposed publicly; all staff functions are VPN-restricted.

## Constraints

- Customer data stays in-region; backups are encrypted and retained for 7 years.
- Planned maintenance windows outside business hours (08:00 to 18:00 local).
- The legacy policy tool remains read-only during a 6 month migration overlap.
"""

F["Analyst/WriteSystemReqs/1"] = """\
# System Requirements List

- SYS-1: Policy service managing quote, bind, issue, endorse, renew, and cancel states with a persisted transition history per policy. (Traces: REQ-1)
- SYS-2: Access control module with five role profiles and per-role permission sets enforced at the API layer. (Traces: REQ-2)
- SYS-3: Underwriting approval workflow that blocks issue of policies above the premium threshold until a second underwriter approves. (Traces: REQ-3)
- SYS-4: Renewal scheduler that prepares offers at 45 days, dispatches at 30 days, and follows up at 14 days before expiry. (Traces: REQ-4)
- SYS-5: Agent repricing rule that accepts renewal premium changes within the underwriting band and routes exceptions to an underwriter queue. (Traces: REQ-4, REQ-3)
- SYS-6: Claims intake service capturing incident details from phone and web channels and verifying coverage against the linked policy before opening a claim file. (Traces: REQ-5)
- SYS-7: Claim status visibility for customer, agent, and assigned adjuster, with notifications on state change. (Traces: REQ-5)
- SYS-8: Reserve and settlement controls: reserve edits restricted to adjusters, settlements above 25,000 routed for claims manager sign-off. (Traces: REQ-6)
- SYS-9: Billing engine supporting annual, semi-annual, and monthly schedules, direct debit and card collection, and the 7/21/30 day overdue ladder ending in cover suspension. (Traces: REQ-7)
- SYS-10: Master customer record with deduplication on create and merge tooling, shared by policy, claims, and billing modules, with document filing per customer. (Traces: REQ-8)
- SYS-11: Performance and availability: two-second response for call-handling screens at 60 concurrent users and business-hours availability with maintenance windows outside them. (Traces: REQ-9)
- SYS-12: Security and audit: encryption at rest, role-scoped data access, and timestamped audit records for suspension, reinstatement, and policy transitions. (Traces: REQ-10, REQ-1)
"""

_RM_INTRO = """\
# Requirements Model

Use case diagrams for the four core areas. Actors are the confirmed staff
roles plus the customer; use cases follow the system requirements list.
"""

_RM_D1 = """\
```plantuml
@startuml
left to right direction
title Policy Management
actor "Insurance Agent" as agent
actor "Underwriter" as uw
usecase "Create Quote" as UC1
usecase "Issue Policy" as UC2
usecase "Approve High Premium" as UC3
usecase "Renew Policy" as UC4
usecase "Endorse Policy" as UC5
agent --> UC1
agent --> UC2
agent --> UC4
agent --> UC5
uw --> UC3
UC2 ..> UC3 : <<include>>
UC4 ..> UC3 : <<include>>
@enduml
```"""

_RM_D2 = """\
```plantuml
@startuml
left to right direction
title Claims Processing
actor "Customer" as cust
actor "Claims Adjuster" as adj
actor "Claims Manager" as mgr
usecase "Report Claim" as UC1
usecase "Verify Coverage" as UC2
usecase "Track Claim Status" as UC3
usecase "Set Reserve" as UC4
usecase "Settle Claim" as UC5
usecase "Approve Large Settlement" as UC6
cust --> UC1
cust --> UC3
adj --> UC4
adj --> UC5
mgr --> UC6
UC1 ..> UC2 : <<include>>
UC5 ..> UC6 : <<extend>>
@enduml
```"""

_RM_D3 = """\
```plantuml
@startuml
left to right direction
title Customer Management
actor "Insurance Agent" as agent
actor "Administrator" as admin
usecase "Register Customer" as UC1
usecase "Merge Duplicate Records" as UC2
usecase "Update Contact Details" as UC3
usecase "File Customer Document" as UC4
agent --> UC1
agent --> UC3
agent --> UC4
admin --> UC2
UC1 ..> UC2 : <<extend>>
@enduml
```"""

_RM_D4 = """\
```plantuml
@startuml
left to right direction
title Billing and Reporting
actor "Billing Staff" as billing
actor "Administrator" as admin
usecase "Collect Payment" as UC1
usecase "Send Overdue Notice" as UC2
usecase "Suspend Cover" as UC3
usecase "Produce Monthly Reports" as UC4
billing --> UC1
billing --> UC2
billing --> UC3
admin --> UC4
UC3 ..> UC2 : <<include>>
@enduml
```"""

F["Analyst/BuildReqModel/1"] = "\n".join([_RM_INTRO, _RM_D1, "", _RM_D2, "", _RM_D3, "", _RM_D4, ""])

F["Archivist/WriteReqSpecs/1"] = """\
# Software Requirements Specification

## Introduction

This specification defines the insurance management system requested in the
project brief. It covers policy administration, claims processing, customer
management, and billing for a property and casualty insurer writing auto
and home lines, with roughly 42,000 policies in force and 60 concurrent
staff users. Sources: the product analysis report, seven interview rounds
with the operations lead, and the derived requirements lists.

## Overall Description

The system is a browser-based back-office platform organised around a
shared, deduplicated customer record. Five staff roles (agent, underwriter,
claims adjuster, billing staff, administrator) work through role-scoped
screens. Policies move through an audited lifecycle with automated renewal
scheduling; claims flow from intake with coverage verification through
reserve management to settlement with threshold approvals; billing runs
annual, semi-annual, and monthly schedules with a regulated overdue ladder.
The platform replaces a legacy desktop tool, which stays read-only during a
six month migration overlap.

## Appendices

- A. Glossary: policy transition terms (quote, bind, issue, endorse, renew,
  cancel) follow standard property and casualty usage.
- B. Traceability: system requirements reference user requirements by REQ
  id; see the System Requirements section.
"""

# -- review session (4 rounds) -------------------------------------------------

F["Reviewer/ReviewAsk/1"] = """\
Looking at the specification as interviewer: the interview established a
45/30/14 day renewal ladder and an agent repricing band. Does the
specification capture both the timing and the band routing faithfully, and
is anything from the interview missing?"""

F["Interviewer/ReviewAnswer/1"] = """\
The renewal timing is captured in SYS-4 and the band routing in SYS-5, both
consistent with what the end user described. One gap from the interview:
the end user emphasised that administrators must not edit financial
records, which is only implied by role scoping. I suggest the revision
state that restriction explicitly in the access control requirement."""

F["Reviewer/ReviewAsk/2"] = """\
From the analyst's seat: are the system requirements internally consistent
and fully traced to user requirements, and do the four use case diagrams
cover the functional surface without inventing features?"""

F["Analyst/ReviewAnswer/1"] = """\
Traceability is complete: each SYS entry cites its REQ sources and no REQ
is orphaned. The four diagrams match the four functional areas. Two
consistency notes: SYS-5 should name the band source (underwriting
configuration), and the reporting use case in the billing diagram has no
backing SYS entry; the revision should either add a reporting requirement
or mark reporting as out of scope for release one."""

F["Reviewer/ReviewAsk/3"] = """\
As deployer: is the operating environment section complete enough to stand
up the system (sizing, integrations, data residency), and are there
deployment risks the specification should flag?"""

F["Deployer/ReviewAnswer/1"] = """\
The environment section covers sizing, SSO, the payment bureau SFTP link,
and data residency. Two flags for the revision: the public claim intake
endpoint deserves an explicit hardening note (rate limiting, WAF), and the
six month read-only overlap with the legacy tool should appear as a
migration constraint in the specification itself, not only in the
environment list."""

F["Reviewer/ReviewAsk/4"] = """\
Finally, from the end user's perspective: does this specification describe
a system your staff could run the business on from day one, and are the
hard constraints you raised reflected?"""

F["EndUser/ReviewAnswer/1"] = """\
Yes, the daily flows are all here and the hard constraints made it in:
two-second screens, business-hours availability, encryption, and the audit
trail. One request: month-end management reports (loss ratios, renewal
rates, outstanding claims) came up in the question list but are thin in the
specification. Please make reporting an explicit requirement in the
revision."""

# -- review write-ups, validation, revision -------------------------------------

F["Reviewer/WriteReviewComs/1"] = """\
# Review Comments

## Round 1 (Interviewer)

- Finding: renewal timing (SYS-4) and repricing band routing (SYS-5) match
  the interview record.
- Issue RC1-1: the administrator prohibition on editing financial records
  is implicit only. Recommendation: state it explicitly in the access
  control requirement (REQ-2/SYS-2).
"""

F["Reviewer/WriteReviewComs/2"] = """\
# Review Comments

## Round 2 (Analyst)

- Finding: SYS-to-REQ traceability is complete with no orphaned entries.
- Issue RC2-1: SYS-5 should cite the underwriting configuration as the
  source of the repricing band.
- Issue RC2-2: the "Produce Monthly Reports" use case has no backing
  system requirement. Recommendation: add a reporting requirement.
"""

F["Reviewer/WriteReviewComs/3"] = """\
# Review Comments

## Round 3 (Deployer)

- Finding: environment sizing, SSO, payment SFTP, and data residency are
  covered.
- Issue RC3-1: add a hardening note for the public claim intake endpoint
  (rate limiting, WAF).
- Issue RC3-2: carry the six month legacy read-only overlap into the
  specification as a migration constraint.
"""

F["Reviewer/WriteReviewComs/4"] = """\
# Review Comments

## Round 4 (EndUser)

- Finding: daily operational flows and all hard constraints (response
  time, availability, encryption, audit) are reflected.
- Issue RC4-1: month-end management reporting (loss ratios, renewal rates,
  outstanding claims) is underspecified. Recommendation: promote reporting
  to an explicit requirement.
"""

F["Reviewer/WriteValidReport/1"] = """\
# Validation Report

## Verdict

The specification is approved for revision. No blocking defects were
found; six improvement items were raised across four review rounds.

## Items to Address

1. RC1-1: make the administrator financial-edit prohibition explicit
   (access control).
2. RC2-1: cite the underwriting configuration as the repricing band
   source.
3. RC2-2 and RC4-1: add an explicit month-end reporting requirement
   backing the reporting use case.
4. RC3-1: add public claim intake hardening (rate limiting, WAF).
5. RC3-2: record the six month legacy read-only overlap as a migration
   constraint in the specification.

## Coverage

All four review rounds completed; comments were collected from the
interviewer, analyst, deployer, and end user perspectives.
"""

F["Archivist/ReviseReqSpecs/1"] = """\
# Software Requirements Specification

## Introduction

This revised specification defines the insurance management system
requested in the project brief, incorporating the validation report items
from the four-round review. It covers policy administration, claims
processing, customer management, billing, and month-end reporting for a
property and casualty insurer writing auto and home lines.

## Overall Description

The system is a browser-based back-office platform organised around a
shared, deduplicated customer record. Five staff roles work through
role-scoped screens; administrators manage accounts but are explicitly
barred from editing financial records (RC1-1). Policies move through an
audited lifecycle with automated renewal scheduling; agent repricing in
renewals is bounded by the band defined in underwriting configuration
(RC2-1). Claims flow from intake with coverage verification through
reserve management to settlement with threshold approvals. Billing runs
annual, semi-annual, and monthly schedules with the 7/21/30 day overdue
ladder. Migration constraint (RC3-2): the legacy policy tool remains
read-only for six months after go-live while records migrate.

## Operating Environment

Two load-balanced application VMs (8 vCPU, 32 GB) and a PostgreSQL 15
primary with warm standby on Ubuntu 22.04, containerised with Docker.
Documents go to an S3-compatible store; authentication is company SSO
(OpenID Connect). HTTPS only with TLS 1.2 or newer; staff functions are
VPN-restricted. The public claim intake endpoint is hardened with rate
limiting and a web application firewall (RC3-1). Customer data stays
in-region with encrypted 7-year backups; maintenance happens outside the
08:00 to 18:00 business window.

## System Requirements

- SYS-1: Policy service managing quote, bind, issue, endorse, renew, and cancel states with a persisted transition history per policy. (Traces: REQ-1)
- SYS-2: Access control module with five role profiles enforced at the API layer; administrator profiles exclude all financial record mutations. (Traces: REQ-2)
- SYS-3: Underwriting approval workflow that blocks issue of policies above the premium threshold until a second underwriter approves. (Traces: REQ-3)
- SYS-4: Renewal scheduler that prepares offers at 45 days, dispatches at 30 days, and follows up at 14 days before expiry. (Traces: REQ-4)
- SYS-5: Agent repricing rule bounded by the band in underwriting configuration, routing exceptions to an underwriter queue. (Traces: REQ-4, REQ-3)
- SYS-6: Claims intake service capturing incident details from phone and web channels and verifying coverage before opening a claim file. (Traces: REQ-5)
- SYS-7: Claim status visibility for customer, agent, and assigned adjuster, with notifications on state change. (Traces: REQ-5)
- SYS-8: Reserve and settlement controls: reserve edits restricted to adjusters, settlements above 25,000 routed for claims manager sign-off. (Traces: REQ-6)
- SYS-9: Billing engine supporting annual, semi-annual, and monthly schedules, direct debit and card collection, and the 7/21/30 day overdue ladder. (Traces: REQ-7)
- SYS-10: Master customer record with deduplication, merge tooling, and per-customer document filing shared across modules. (Traces: REQ-8)
- SYS-11: Performance and availability: two-second response for call-handling screens at 60 concurrent users, business-hours availability. (Traces: REQ-9)
- SYS-12: Security and audit: encryption at rest, role-scoped access, timestamped audit records for suspension, reinstatement, and transitions. (Traces: REQ-10, REQ-1)
- SYS-13: Month-end reporting producing loss ratios, renewal rates, and outstanding claims summaries for management. (Traces: REQ-8, REQ-1)

## Requirements Models

The four use case diagrams from the requirements model remain normative:
Policy Management, Claims Processing, Customer Management, and Billing and
Reporting. The "Produce Monthly Reports" use case is now backed by SYS-13
(RC2-2, RC4-1).

## Appendices

- A. Glossary: policy transition terms follow standard property and
  casualty usage.
- B. Revision log: this version addresses validation report items RC1-1,
  RC2-1, RC2-2, RC3-1, RC3-2, and RC4-1.
"""

# -- feedback-loop refresh replies (step 2) -------------------------------------

F["Deployer/WriteRunEnv/2"] = """\
# Operating Environment List

## Hardware

- Application servers: two virtual machines, 8 vCPU and 32 GB RAM each, behind a load balancer.
- Database server: one primary with a warm standby, 16 vCPU, 64 GB RAM, SSD storage sized for 5 years of policy and claims data, rechecked against the updated requirements volume.
- Office workstations access the system through current Chrome or Edge browsers; no desktop installation.

## Software

- Server OS: Ubuntu 22.04 LTS.
- Runtime: containerised services on Docker with a PostgreSQL 15 database.
- Document storage: S3-compatible object store for generated offers, notices, and settlement letters.
- Authentication via the company single sign-on (OpenID Connect).
- Batch window reserved nightly for bulk renewal processing.

## Network

- HTTPS only, TLS 1.2 or newer, internal traffic on a private subnet.
- Direct debit submissions leave through the existing SFTP gateway to the payment bureau.
- Web claim intake is exposed publicly; all staff functions are VPN-restricted.

## Constraints

- Customer data stays in-region; backups are encrypted and retained for 7 years.
- Planned maintenance windows outside business hours (08:00 to 18:00 local).
- The legacy policy tool remains read-only during a 6 month migration overlap.
- Bulk renewal jobs for corporate accounts must finish inside the nightly batch window.
"""

F["Analyst/WriteSystemReqs/2"] = """\
# System Requirements List

- SYS-1: Policy service managing quote, bind, issue, endorse, renew, and cancel states with a persisted transition history per policy. (Traces: REQ-1)
- SYS-2: Access control module with five role profiles and per-role permission sets enforced at the API layer. (Traces: REQ-2)
- SYS-3: Underwriting approval workflow that blocks issue of policies above the premium threshold until a second underwriter approves. (Traces: REQ-3)
- SYS-4: Renewal scheduler that prepares offers at 45 days, dispatches at 30 days, and follows up at 14 days before expiry. (Traces: REQ-4)
- SYS-5: Agent repricing rule that accepts renewal premium changes within the underwriting band and routes exceptions to an underwriter queue. (Traces: REQ-4, REQ-3)
- SYS-6: Claims intake service capturing incident details from phone and web channels and verifying coverage against the linked policy before opening a claim file. (Traces: REQ-5)
- SYS-7: Claim status visibility for customer, agent, and assigned adjuster, with notifications on state change. (Traces: REQ-5)
- SYS-8: Reserve and settlement controls: reserve edits restricted to adjusters, settlements above 25,000 routed for claims manager sign-off. (Traces: REQ-6)
- SYS-9: Billing engine supporting annual, semi-annual, and monthly schedules, direct debit and card collection, and the 7/21/30 day overdue ladder ending in cover suspension. (Traces: REQ-7)
- SYS-10: Master customer record with deduplication on create and merge tooling, shared by policy, claims, and billing modules, with document filing per customer. (Traces: REQ-8)
- SYS-11: Performance and availability: two-second response for call-handling screens at 60 concurrent users and business-hours availability with maintenance windows outside them. (Traces: REQ-9)
- SYS-12: Security and audit: encryption at rest, role-scoped data access, and timestamped audit records for suspension, reinstatement, and policy transitions. (Traces: REQ-10, REQ-1)
- SYS-13: Bulk renewal-processing job that generates, prices, and dispatches renewal offers for corporate account batches inside the nightly window. (Traces: REQ-11, REQ-4)
"""

F["Analyst/BuildReqModel/2"] = "\n".join([
    _RM_INTRO,
    _RM_D1.replace(
        'usecase "Endorse Policy" as UC5\n',
        'usecase "Endorse Policy" as UC5\nusecase "Run Bulk Renewals" as UC6\n',
    ).replace("uw --> UC3\n", "uw --> UC3\nagent --> UC6\nUC6 ..> UC4 : <<include>>\n"),
    "",
    _RM_D2,
    "",
    _RM_D3,
    "",
    _RM_D4,
    "",
])

F["Archivist/ReviseReqSpecs/2"] = """\
# Software Requirements Specification

## Introduction

This revision incorporates the updated user requirements list, which adds
bulk policy renewals for corporate accounts, alongside the previously
addressed validation report items.

## Overall Description

The system is a browser-based back-office platform organised around a
shared, deduplicated customer record. Five staff roles work through
role-scoped screens; administrators are barred from editing financial
records. Policies move through an audited lifecycle with automated renewal
scheduling, now including nightly bulk renewal batches for corporate
accounts. Claims flow from intake with coverage verification through
reserve management to settlement with threshold approvals. Billing runs
annual, semi-annual, and monthly schedules with the 7/21/30 day overdue
ladder. The legacy policy tool remains read-only for six months after
go-live.

## Operating Environment

Two load-balanced application VMs and a PostgreSQL 15 primary with warm
standby on Ubuntu 22.04, containerised with Docker, with a nightly batch
window reserved for bulk renewal processing. Documents go to an
S3-compatible store; authentication is company SSO. HTTPS only; the public
claim intake endpoint is hardened with rate limiting and a web application
firewall. Customer data stays in-region with encrypted 7-year backups.

## System Requirements

- SYS-1: Policy service managing quote, bind, issue, endorse, renew, and cancel states with a persisted transition history per policy. (Traces: REQ-1)
- SYS-2: Access control module with five role profiles enforced at the API layer; administrator profiles exclude all financial record mutations. (Traces: REQ-2)
- SYS-3: Underwriting approval workflow that blocks issue of policies above the premium threshold until a second underwriter approves. (Traces: REQ-3)
- SYS-4: Renewal scheduler that prepares offers at 45 days, dispatches at 30 days, and follows up at 14 days before expiry. (Traces: REQ-4)
- SYS-5: Agent repricing rule bounded by the band in underwriting configuration, routing exceptions to an underwriter queue. (Traces: REQ-4, REQ-3)
- SYS-6: Claims intake service capturing incident details and verifying coverage before opening a claim file. (Traces: REQ-5)
- SYS-7: Claim status visibility for customer, agent, and assigned adjuster. (Traces: REQ-5)
- SYS-8: Reserve and settlement controls with adjuster-only reserves and manager sign-off above 25,000. (Traces: REQ-6)
- SYS-9: Billing engine with annual, semi-annual, and monthly schedules and the 7/21/30 day overdue ladder. (Traces: REQ-7)
- SYS-10: Master customer record with deduplication, merge tooling, and per-customer document filing. (Traces: REQ-8)
- SYS-11: Two-second response for call-handling screens at 60 concurrent users, business-hours availability. (Traces: REQ-9)
- SYS-12: Encryption at rest, role-scoped access, timestamped audit records. (Traces: REQ-10, REQ-1)
- SYS-13: Bulk renewal-processing job for corporate account batches inside the nightly window. (Traces: REQ-11, REQ-4)

## Requirements Models

The four use case diagrams remain normative; the Policy Management diagram
adds the "Run Bulk Renewals" use case backed by SYS-13.

## Appendices

- A. Glossary: policy transition terms follow standard property and
  casualty usage.
- B. Revision log: this version incorporates the bulk corporate renewal
  requirement (REQ-11) added to the user requirements list.
"""

# -- optional-action replies (config variants) ----------------------------------

F["Analyst/ClassifyUserReqs/1"] = """\
# Requirements Classification Report

Each user requirement is classified by type and delivery priority.

- REQ-1: Functional, High. Core policy lifecycle.
- REQ-2: Functional, High. Role-based access underpins every screen.
- REQ-3: Functional, High. Regulatory exposure on high premiums.
- REQ-4: Functional, Medium. Renewal automation saves agent time.
- REQ-5: Functional, High. Claims intake replaces double keying.
- REQ-6: Functional, High. Financial control on settlements.
- REQ-7: Functional, Medium. Billing ladder is stable, well understood.
- REQ-8: Functional, High. Single customer record removes daily pain.
- REQ-9: NonFunctional, High. Response time and availability targets.
- REQ-10: NonFunctional, High. Encryption, access control, audit logging.
"""

F["Deployer/CheckRunEnvReq/1"] = """\
Feasibility check of the user requirements against the planned hosting:
the two-second response target at 60 concurrent users is achievable on the
planned sizing with headroom; direct debit and card collection reuse the
existing payment bureau SFTP gateway; encryption at rest is standard on
the planned database and object store. One watch item: the 7-year
encrypted backup retention needs storage growth of roughly 18 percent per
year, which the object store tier must budget for.
"""

OUT.parent.mkdir(parents=True, exist_ok=True)
with open(OUT, "w", encoding="utf-8") as fh:
    json.dump(F, fh, indent=2, ensure_ascii=False, sort_keys=True)
    fh.write("\n")
print(f"wrote {OUT} with {len(F)} fixtures")
