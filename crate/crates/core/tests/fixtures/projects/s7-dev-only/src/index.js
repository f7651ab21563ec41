import express from 'express';
import { describe } from 'mocha';
